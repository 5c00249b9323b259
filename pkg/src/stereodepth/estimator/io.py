"""Text formats for fitted models and training datasets.

Floats are written with ``repr`` so every value parses back bit-exact.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from ..errors import ParseError, StereoError
from .polynomial import PolynomialModel, n_coefficients
from .training import DepthSample, SizeSample

MAGIC = "POLYMODEL v1"


def format_model(model: PolynomialModel) -> str:
    lines = [
        MAGIC,
        f"degree {model.degree}",
        f"arity {model.feature_arity}",
        f"units {model.units}",
        f"lambda {float(model.ridge_lambda)!r}",
    ]
    for shift, scale, (lo, hi) in zip(model.input_shift, model.input_scale,
                                      model.training_range):
        lines += [f"shift {float(shift)!r}", f"scale {float(scale)!r}", f"range {float(lo)!r} {float(hi)!r}"]
    lines += [f"cv_mae {float(model.cv_mae)!r}", f"cv_mse {float(model.cv_mse)!r}", "coeffs"]
    lines += [repr(float(c)) for c in model.coefficients]
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> PolynomialModel:
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0][1] != MAGIC:
        raise ParseError(f"missing {MAGIC!r} header", lines[0][0] if lines else None)

    fields: dict = {"shift": [], "scale": [], "range": []}
    coeffs: list[float] = []
    in_coeffs = False
    for lineno, line in lines[1:]:
        try:
            if in_coeffs:
                coeffs.append(float(line))
                continue
            key, _, rest = line.partition(" ")
            if key == "coeffs":
                in_coeffs = True
            elif key in ("degree", "arity"):
                fields[key] = int(rest)
            elif key == "units":
                fields["units"] = rest
            elif key in ("lambda", "cv_mae", "cv_mse"):
                fields[key] = float(rest)
            elif key in ("shift", "scale"):
                fields[key].append(float(rest))
            elif key == "range":
                lo, hi = rest.split()
                fields["range"].append((float(lo), float(hi)))
            else:
                raise ParseError(f"unknown key {key!r}", lineno)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None

    for key in ("degree", "arity"):
        if key not in fields:
            raise ParseError(f"model is missing {key!r}")
    expected = n_coefficients(fields["arity"], fields["degree"])
    if len(coeffs) != expected:
        raise ParseError(f"expected {expected} coefficients, found {len(coeffs)}")
    try:
        return PolynomialModel(
            degree=fields["degree"],
            feature_arity=fields["arity"],
            coefficients=tuple(coeffs),
            input_shift=tuple(fields["shift"]),
            input_scale=tuple(fields["scale"]),
            ridge_lambda=fields.get("lambda", 0.0),
            training_range=tuple(fields["range"]),
            cv_mae=fields.get("cv_mae", math.nan),
            cv_mse=fields.get("cv_mse", math.nan),
            units=fields.get("units", ""),
        )
    except StereoError as exc:
        raise ParseError(str(exc)) from None


def save_model(model: PolynomialModel, path) -> None:
    with open(path, "w") as fp:
        fp.write(format_model(model))


def load_model(path) -> PolynomialModel:
    with open(path) as fp:
        return parse_model(fp.read())


# -- datasets -----------------------------------------------------------------


def _rows(text: str, ncols: int) -> Iterable[tuple[int, list[float]]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if len(tok) != ncols:
            raise ParseError(f"expected {ncols} columns, found {len(tok)}", lineno)
        try:
            yield lineno, [float(t) for t in tok]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None


def parse_depth_dataset(text: str) -> list[DepthSample]:
    out = []
    for lineno, (d, z) in _rows(text, 2):
        try:
            out.append(DepthSample(d, z))
        except StereoError as exc:
            raise ParseError(str(exc), lineno) from None
    return out


def parse_size_dataset(text: str) -> list[SizeSample]:
    out = []
    for lineno, (z, px, real) in _rows(text, 3):
        try:
            out.append(SizeSample(z, px, real))
        except StereoError as exc:
            raise ParseError(str(exc), lineno) from None
    return out


def _header(comments: Sequence[str], columns: str) -> str:
    return "".join(f"# {c}\n" for c in comments) + f"# {columns}\n"


def format_depth_dataset(samples: Sequence[DepthSample], comments: Sequence[str] = ()) -> str:
    body = "".join(f"{float(s.disparity)!r} {float(s.depth)!r}\n" for s in samples)
    return _header(comments, "disparity depth") + body


def format_size_dataset(samples: Sequence[SizeSample], comments: Sequence[str] = ()) -> str:
    body = "".join(f"{float(s.depth)!r} {float(s.pixel_extent)!r} {float(s.real_extent)!r}\n" for s in samples)
    return _header(comments, "depth pixel_extent real_extent") + body
