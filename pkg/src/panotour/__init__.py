"""360-degree virtual tour engine.

Validate equirectangular panoramas, compile scene/hotspot tours into
servable bundles, render perspective and little-planet views, serve
tours over HTTP with request metrics, and simulate page load times.
"""

__version__ = "0.1.0"
