"""Text-line segmentation on the DCT coefficients of baseline JPEG documents."""

__version__ = "0.1.0"
