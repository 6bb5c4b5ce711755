"""Interactive photo-enhancement gallery: pixel pipeline and HTTP service."""
