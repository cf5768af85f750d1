"""Text formats: construction config files, set specs and rake specs.

Config files are flat ``key = value`` lines (``#`` starts a comment, values may
be quoted)::

    h1 = 1
    cuts = "list:2,3,4"        # or affine:a,b / equal-height
    spacers = staircase        # or const:k / file:<path>
    base_width = 1
"""
from __future__ import annotations

import re
from pathlib import Path

from .construction import (
    Affine,
    ConstantHeight,
    ConstructionParams,
    EqualHeight,
    ExplicitList,
    ExplicitSpacers,
    Staircase,
)
from .errors import SpecSyntaxError
from .intervals import parse_rational
from .levelset import LevelSet

CONSTRUCTION_KEYS = ("h1", "cuts", "spacers", "base_width")


def read_config(path) -> dict:
    out: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise SpecSyntaxError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.replace("-", "_")] = value
    return out


def parse_int_list(text: str) -> list:
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise SpecSyntaxError(f"bad integer list {text!r}") from exc


def parse_cuts(text: str):
    s = str(text).strip()
    kind, _, arg = s.partition(":")
    kind = kind.strip().lower()
    if kind == "list":
        vals = parse_int_list(arg)
        if not vals or min(vals) < 2:
            raise SpecSyntaxError(f"cut list must be nonempty with entries >= 2: {text!r}")
        return ExplicitList(tuple(vals))
    if kind == "affine":
        vals = parse_int_list(arg)
        if len(vals) != 2:
            raise SpecSyntaxError(f"affine cuts need two integers: {text!r}")
        return Affine(*vals)
    if kind in ("equal-height", "equal_height"):
        return EqualHeight()
    raise SpecSyntaxError(f"unknown cut policy {text!r}")


def read_spacer_file(path) -> ExplicitSpacers:
    """One line per stage, comma-separated spacer counts."""
    rows = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(tuple(parse_int_list(line)))
    return ExplicitSpacers(tuple(rows))


def parse_spacers(text: str, base_dir=None):
    s = str(text).strip()
    if s.lower() == "staircase":
        return Staircase()
    kind, _, arg = s.partition(":")
    if kind.lower() == "const":
        try:
            return ConstantHeight(int(arg))
        except ValueError as exc:
            raise SpecSyntaxError(f"bad spacer height {text!r}") from exc
    if kind.lower() == "file":
        p = Path(arg)
        if base_dir is not None and not p.is_absolute():
            p = Path(base_dir) / p
        return read_spacer_file(p)
    raise SpecSyntaxError(f"unknown spacer policy {text!r}")


def params_from_mapping(cfg: dict, base_dir=None) -> ConstructionParams:
    try:
        h1 = int(cfg.get("h1", 1))
    except ValueError as exc:
        raise SpecSyntaxError(f"h1 must be an integer, got {cfg.get('h1')!r}") from exc
    if "cuts" not in cfg:
        raise SpecSyntaxError("config has no 'cuts' entry")
    return ConstructionParams(
        h1=h1,
        cuts=parse_cuts(cfg["cuts"]),
        spacers=parse_spacers(cfg.get("spacers", "staircase"), base_dir),
        base_width=parse_rational(cfg.get("base_width", "1")),
    )


def parse_levels(text: str) -> list:
    """``0,3..5`` -> ``[0, 3, 4, 5]``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(\d+)\.\.(\d+)", part)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            if b < a:
                raise SpecSyntaxError(f"empty range {part!r}")
            out.extend(range(a, b + 1))
        elif part.isdigit():
            out.append(int(part))
        else:
            raise SpecSyntaxError(f"bad level item {part!r}")
    return out


def _fields(text: str, sep: str) -> dict:
    out = {}
    for item in str(text).split(sep):
        item = item.strip()
        if not item:
            continue
        key, eq, value = item.partition("=")
        if not eq:
            raise SpecSyntaxError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def parse_set(text: str) -> LevelSet:
    """``stage=<j>:levels=<list>``."""
    f = _fields(text, ":")
    if set(f) != {"stage", "levels"}:
        raise SpecSyntaxError(f"set spec needs stage= and levels=: {text!r}")
    try:
        stage = int(f["stage"])
    except ValueError as exc:
        raise SpecSyntaxError(f"bad stage in {text!r}") from exc
    return LevelSet(stage, parse_levels(f["levels"]))


def _compress(levels: list) -> str:
    parts = []
    i = 0
    while i < len(levels):
        k = i
        while k + 1 < len(levels) and levels[k + 1] == levels[k] + 1:
            k += 1
        parts.append(str(levels[i]) if k == i else f"{levels[i]}..{levels[k]}")
        i = k + 1
    return ",".join(parts)


def format_set(s: LevelSet) -> str:
    return f"stage={s.stage}:levels={_compress(s.to_list())}"


def parse_rake(text: str) -> dict:
    """``j=<j>;s=<s>;L=<L>;step=<q>;levels=<lo>..<hi>`` -> keyword dict for build_rake."""
    f = _fields(text, ";")
    need = {"j", "s", "L", "step", "levels"}
    if set(f) != need:
        raise SpecSyntaxError(f"rake spec needs {sorted(need)}: {text!r}")
    m = re.fullmatch(r"(\d+)\.\.(\d+)", f["levels"])
    if not m:
        raise SpecSyntaxError(f"rake levels must be lo..hi: {text!r}")
    try:
        return dict(j=int(f["j"]), s=int(f["s"]), L=int(f["L"]), tooth_step=int(f["step"]),
                    n_lo=int(m.group(1)), n_hi=int(m.group(2)))
    except ValueError as exc:
        raise SpecSyntaxError(f"bad integer in rake spec {text!r}") from exc


def parse_windows(text: str) -> list:
    """``5,7`` are stage windows; ``a..b`` items are literal m ranges."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(\d+)\.\.(\d+)", part)
        if m:
            out.append((int(m.group(1)), int(m.group(2))))
        elif part.isdigit():
            out.append(int(part))
        else:
            raise SpecSyntaxError(f"bad window {part!r}")
    return out
