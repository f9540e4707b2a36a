"""Edge-guided image outpainting at desk scale.

Circular boundary rearrangement, a progressive mask schedule, Canny edge
maps, GAN objectives with hand-written gradients, a numpy network stack
and an image quality battery.
"""

__version__ = "0.1.0"
