"""
Line-oriented model file.

    mbm-svm 1
    kernel rbf
    c <C>
    gamma <gamma>
    tolerance <tol>
    max_passes <passes>
    classes <label> ...
    scaler none | scaler <method> <loc...> | <spread...>
    machine <neg> <pos> <bias> <count>
    <dual_coef> <v0> <v1> [<v2>]      (count lines)

Reals are written with 17 significant digits so a reload is exact.
"""

from pathlib import Path
from typing import List

import numpy as np

from ..core.exceptions import ModelFormatError
from ..feature.scaler import FeatureScaler
from .model import SvmModel, SvmParams, BinarySvm

FORMAT_NAME = "mbm-svm"
FORMAT_VERSION = 1


def _real(x: float) -> str:
    return format(float(x), ".17g")


def format_model(model: SvmModel) -> str:
    p = model.params
    lines = [
        f"{FORMAT_NAME} {FORMAT_VERSION}",
        "kernel rbf",
        f"c {_real(p.c)}",
        f"gamma {_real(p.gamma)}",
        f"tolerance {_real(p.tolerance)}",
        f"max_passes {p.max_passes}",
        "classes " + " ".join(str(c) for c in model.classes),
        f"dimension {model.dimension}",
    ]
    if model.scaler is None:
        lines.append("scaler none")
    else:
        s = model.scaler
        lines.append(
            f"scaler {s.method} " + " ".join(_real(v) for v in s.loc)
            + " | " + " ".join(_real(v) for v in s.spread)
        )
    for m in model.machines:
        lines.append(f"machine {m.neg_label} {m.pos_label} {_real(m.bias)} {len(m.dual_coefs)}")
        for coef, sv in zip(m.dual_coefs, m.support_vectors):
            lines.append(" ".join([_real(coef)] + [_real(v) for v in sv]))
    return "\n".join(lines) + "\n"


def write_model(model: SvmModel, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_model(model))
    return path


class _Lines:
    def __init__(self, text: str):
        self._lines = [l for l in text.splitlines() if l.strip()]
        self._pos = 0

    def next(self, what: str) -> List[str]:
        if self._pos >= len(self._lines):
            raise ModelFormatError(f"model file ends before {what}")
        line = self._lines[self._pos]
        self._pos += 1
        return line.split()

    def keyed(self, key: str) -> List[str]:
        tokens = self.next(key)
        if not tokens or tokens[0] != key:
            raise ModelFormatError(f"line {self._pos}: expected '{key}', got {' '.join(tokens)!r}")
        return tokens[1:]

    @property
    def done(self) -> bool:
        return self._pos >= len(self._lines)

    @property
    def position(self) -> int:
        return self._pos


def parse_model(text: str) -> SvmModel:
    lines = _Lines(text)
    try:
        header = lines.next("header")
        if header != [FORMAT_NAME, str(FORMAT_VERSION)]:
            raise ModelFormatError(f"not an {FORMAT_NAME} v{FORMAT_VERSION} model: {' '.join(header)!r}")
        if lines.keyed("kernel") != ["rbf"]:
            raise ModelFormatError("only the rbf kernel is supported")
        c = float(lines.keyed("c")[0])
        gamma = float(lines.keyed("gamma")[0])
        tolerance = float(lines.keyed("tolerance")[0])
        max_passes = int(lines.keyed("max_passes")[0])
        classes = tuple(int(v) for v in lines.keyed("classes"))
        dimension = int(lines.keyed("dimension")[0])

        scaler_tokens = lines.keyed("scaler")
        if scaler_tokens == ["none"]:
            scaler = None
        else:
            method, rest = scaler_tokens[0], scaler_tokens[1:]
            if "|" not in rest:
                raise ModelFormatError("scaler line needs 'loc... | spread...'")
            bar = rest.index("|")
            loc = tuple(float(v) for v in rest[:bar])
            spread = tuple(float(v) for v in rest[bar + 1:])
            if len(loc) != dimension or len(spread) != dimension:
                raise ModelFormatError("scaler statistics do not match the model dimension")
            scaler = FeatureScaler(method=method, loc=loc, spread=spread)

        params = SvmParams(c=c, gamma=gamma, tolerance=tolerance, max_passes=max_passes)
        machines = []
        while not lines.done:
            fields = lines.keyed("machine")
            if len(fields) != 4:
                raise ModelFormatError(f"line {lines.position}: machine needs neg, pos, bias, count")
            neg, pos, bias, count = int(fields[0]), int(fields[1]), float(fields[2]), int(fields[3])
            coefs = np.zeros(count)
            svs = np.zeros((count, dimension))
            for k in range(count):
                row = lines.next("support vector")
                if len(row) != dimension + 1:
                    raise ModelFormatError(f"line {lines.position}: expected {dimension + 1} numbers")
                coefs[k] = float(row[0])
                svs[k] = [float(v) for v in row[1:]]
            machines.append(BinarySvm(neg, pos, svs, coefs, bias, gamma))
    except (ValueError, IndexError) as e:
        raise ModelFormatError(f"malformed model file: {e}") from e

    expected = len(classes) * (len(classes) - 1) // 2
    if len(machines) != expected:
        raise ModelFormatError(f"{len(classes)} classes need {expected} machines, found {len(machines)}")
    return SvmModel(params=params, classes=classes, machines=machines, dimension=dimension, scaler=scaler)


def read_model(path: Path) -> SvmModel:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"model file not found: {path}")
    return parse_model(path.read_text())
