from .main import RunConfig, build_parser, main

__all__ = ["RunConfig", "build_parser", "main"]
