"""Reference out-of-process slow stage for cascadekit.

Any program that answers line-delimited JSON predict requests on stdio
can stand in as the cascade's strong classifier. This package is the
working reference: it loads a persisted cascadekit model and serves it
behind that protocol, so the routing pipeline can treat an external
process exactly like the in-process classifier it replaces.
"""

from .server import ServingModel, handle_line, load_serving_model, serve

__version__ = "0.1.0"

__all__ = ["ServingModel", "handle_line", "load_serving_model", "serve"]
