"""Visual similarity toolkit for Unicode codepoints.

Renders codepoints from TrueType collections, embeds the rasters,
clusters the codespace into homoglyph equivalence classes, and evaluates
against the Unicode confusables ground truth.
"""

__version__ = "0.1.0"
