"""Toolkit for profiling the language of online discussion communities.

Builds hybrid word/POS trigram style models and LDA topic profiles per
community, classifies documents by community, and correlates community
feedback (karma, k-index) with style/topic similarity scores.
"""

__version__ = "0.1.0"
