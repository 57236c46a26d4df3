"""Text formats: embedding exports and model checkpoints.

The embedding export is a whitespace-separated token stream so it survives
any line wrapping:

    dim <n>
    entity <name> <v1> ... <vn>
    relation <name>
    octa(...) ... octa(...)       # n octagon literals

Rationals are written exactly (``p`` or ``p/q``), so a load/save cycle is
bit-exact.  A checkpoint is the export of the model's hard-region view
followed by a ``floats`` section carrying the raw trainable parameters at 17
significant digits (enough to round-trip IEEE doubles) and an echo of the
training configuration.
"""

from __future__ import annotations

from typing import TextIO

from .bounds import format_bound
from .octagons import Octagon
from .regions import GeometricEmbedding, Region


def _check_name(name: str) -> str:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"names must be non-empty and whitespace-free: {name!r}")
    return name


def write_embedding(embedding: GeometricEmbedding, fh: TextIO) -> None:
    fh.write(f"dim {embedding.dim}\n")
    for name, vec in embedding.entity_vectors.items():
        tokens = " ".join(format_bound(v) for v in vec)
        fh.write(f"entity {_check_name(name)} {tokens}\n")
    for name, region in embedding.relation_regions.items():
        fh.write(f"relation {_check_name(name)}\n")
        fh.write(" ".join(o.literal() for o in region.slices) + "\n")


def dump_embedding(embedding: GeometricEmbedding, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_embedding(embedding, fh)


class _Tokens:
    def __init__(self, fh: TextIO):
        self._iter = (tok for line in fh for tok in line.split())
        self._pushed = []

    def next(self, what: str) -> str:
        if self._pushed:
            return self._pushed.pop()
        try:
            return next(self._iter)
        except StopIteration:
            raise ValueError(f"unexpected end of file, wanted {what}") from None

    def push(self, tok: str) -> None:
        self._pushed.append(tok)

    def peek(self):
        if not self._pushed:
            try:
                self._pushed.append(next(self._iter))
            except StopIteration:
                return None
        return self._pushed[-1]


def read_embedding(fh: TextIO) -> GeometricEmbedding:
    return _read_embedding_tokens(_Tokens(fh))


def _read_embedding_tokens(tokens: "_Tokens") -> GeometricEmbedding:
    if tokens.next("'dim'") != "dim":
        raise ValueError("embedding file must start with 'dim <n>'")
    dim = int(tokens.next("dimension"))
    entities: dict = {}
    regions: dict = {}
    while True:
        tok = tokens.peek()
        if tok is None or tok == "floats":
            break
        tokens.next("section")
        if tok == "entity":
            name = tokens.next("entity name")
            entities[name] = tuple(tokens.next("coordinate")
                                   for _ in range(dim))
        elif tok == "relation":
            name = tokens.next("relation name")
            regions[name] = Region(tuple(
                Octagon.parse(tokens.next("octagon literal"))
                for _ in range(dim)))
        else:
            raise ValueError(f"unexpected token {tok!r} in embedding file")
    return GeometricEmbedding(dim=dim, entity_vectors=entities,
                              relation_regions=regions)


def load_embedding(path) -> GeometricEmbedding:
    with open(path, encoding="utf-8") as fh:
        return read_embedding(fh)


# ---------------------------------------------------------------------------
# model checkpoints
# ---------------------------------------------------------------------------


def _floats(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in values)


def write_checkpoint(model, config, fh: TextIO) -> None:
    """Hard-region export followed by the raw parameters and config echo.

    The leading section is a regular embedding export (the model's exact
    octagon view at the 0.5 threshold), so region tooling can read a
    checkpoint directly.  The ``floats`` section restores training state
    bit-for-bit: 17 significant digits round-trip IEEE doubles.
    """
    from dataclasses import asdict

    from .model import BANDS

    write_embedding(model.to_geometric_embedding(), fh)
    fh.write("floats\n")
    for key, value in sorted(asdict(config).items()):
        fh.write(f"config {key} {value}\n")
    fh.write(f"config variant {model.variant}\n")
    fh.write(f"config attention {model.attention}\n")
    fh.write(f"config p {model.p:.17g}\n")
    for i, name in enumerate(model.entity_names):
        fh.write(f"param entity {_check_name(name)} "
                 f"{_floats(model.entities[i])}\n")
    for i, name in enumerate(model.relation_names):
        for band in BANDS:
            fh.write(f"param relation {_check_name(name)} center_{band} "
                     f"{_floats(model.centers[band][i])}\n")
            fh.write(f"param relation {name} width_{band} "
                     f"{_floats(model.widths[band][i])}\n")
            if model.attention:
                fh.write(f"param relation {name} attention_{band} "
                         f"{_floats(model.attentions[band][i])}\n")


def dump_checkpoint(model, config, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_checkpoint(model, config, fh)


def read_checkpoint(fh: TextIO):
    """Returns (model, config dict, hard-region embedding)."""
    import numpy as np

    from .model import BANDS, OctagonModel

    tokens = _Tokens(fh)
    embedding = _read_embedding_tokens(tokens)
    if tokens.next("'floats'") != "floats":
        raise ValueError("checkpoint is missing its floats section")
    dim = embedding.dim
    config: dict = {}
    entity_names, entity_rows = [], []
    relation_names: list = []
    arrays: dict = {}
    while True:
        tok = tokens.peek()
        if tok is None:
            break
        tokens.next("section")
        if tok == "config":
            key = tokens.next("config key")
            config[key] = tokens.next("config value")
        elif tok == "param":
            what = tokens.next("param kind")
            name = tokens.next("name")
            if what == "entity":
                entity_names.append(name)
                entity_rows.append([float(tokens.next("value"))
                                    for _ in range(dim)])
            elif what == "relation":
                if name not in relation_names:
                    relation_names.append(name)
                slot = tokens.next("parameter name")
                row = [float(tokens.next("value")) for _ in range(dim)]
                arrays.setdefault(slot, {})[name] = row
            else:
                raise ValueError(f"unknown param kind {what!r}")
        else:
            raise ValueError(f"unexpected token {tok!r} in checkpoint")

    def stack(prefix):
        return {
            band: np.array([arrays[f"{prefix}_{band}"][r]
                            for r in relation_names])
            for band in BANDS
        }

    attention = config.get("attention", "False") == "True"
    model = OctagonModel(
        dim=dim,
        variant=config.get("variant", "uvxy"),
        p=float(config.get("p", 1.0)),
        attention=attention,
        entity_names=entity_names,
        relation_names=relation_names,
        entities=np.array(entity_rows),
        centers=stack("center"),
        widths=stack("width"),
        attentions=stack("attention") if attention else None,
    )
    return model, config, embedding


def load_checkpoint(path):
    with open(path, encoding="utf-8") as fh:
        return read_checkpoint(fh)
