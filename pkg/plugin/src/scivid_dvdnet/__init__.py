"""Reference VDN1 video denoiser plugin."""

__version__ = "0.1.0"
