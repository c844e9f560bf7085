"""Cut-and-project quasicrystals and free path statistics of the Lorentz gas on them."""

__version__ = "0.1.0"
