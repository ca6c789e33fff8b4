"""
Cineloop

Turns a still image, an Eulerian motion field and a static/dynamic mask
into a seamlessly looping cinemagraph by jointly splatting a Laplacian
feature pyramid along future and past displacements.
"""

__version__ = '0.1.0'
