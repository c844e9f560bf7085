"""Dataclass configs for the experiment scripts: every field becomes a --flag."""
from __future__ import annotations

import argparse
import dataclasses
import json
import typing


def _parse_tuple(text, caster):
    return tuple(caster(x) for x in text.split(",") if x.strip())


def build_parser(cls, description=None) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description or cls.__doc__, allow_abbrev=False)
    hints = typing.get_type_hints(cls)
    for f in dataclasses.fields(cls):
        tp = hints[f.name]
        flag = "--" + f.name.replace("_", "-")
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        origin = typing.get_origin(tp)
        if tp is bool:
            p.add_argument(flag, action=argparse.BooleanOptionalAction, default=default)
        elif origin is tuple:
            inner = typing.get_args(tp)[0]
            p.add_argument(flag, type=lambda s, c=inner: _parse_tuple(s, c), default=default,
                           help=f"comma list (default {','.join(map(str, default))})")
        else:
            p.add_argument(flag, type=tp, default=default, help=f"default {default}")
    return p


def from_argv(cls, argv=None):
    args = build_parser(cls).parse_args(argv)
    return cls(**vars(args))


def dump(cfg) -> str:
    return json.dumps(dataclasses.asdict(cfg), sort_keys=True)
