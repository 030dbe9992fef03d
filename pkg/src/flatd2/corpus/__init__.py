"""Bundled example systems."""
from importlib import resources

NAMES = ("vtol", "sin", "product", "sqrt", "academic2", "coin", "chain")


def path(name: str):
    return resources.files(__name__).joinpath(f"{name}.model")


def text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown corpus model {name!r}; choose from {', '.join(NAMES)}")
    return path(name).read_text()


def load(name: str, **sampling):
    from ..modelio import parse_model

    return parse_model(text(name), **sampling)
