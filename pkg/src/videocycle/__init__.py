"""Unpaired video-to-video translation with temporally consistent
adversarial training, plus a per-frame baseline, synthetic two-domain video
data, and a flicker evaluation harness."""

__version__ = "0.1.0"
