"""Online k-taxi workbench: algorithms, adversaries, reductions and an offline oracle."""
__version__ = "0.1.0"
