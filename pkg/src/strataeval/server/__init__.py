"""HTTP review service exposing one study to the browser UI and API clients."""

from .app import create_app, serve

__all__ = ["create_app", "serve"]
