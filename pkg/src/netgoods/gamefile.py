"""Game file I/O.

Schema: {"n": int, "W": [n*n reals, row-major], "lower": [n reals],
"upper": [n reals], "players": [{"value": spec, "cost": spec}, ...]} where a
spec is {"family": tag, "params": {...}}.  Loading enforces every game
invariant and reports field-precise errors; saving is canonical (sorted keys,
fixed layout), so load/save round-trips are byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import InputError
from .functions import spec_from_dict, spec_to_dict
from .game import Game


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise InputError(f"{where}: missing required field '{key}'")
    return doc[key]


def _number_list(value, count: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != count:
        raise InputError(f"{where}: expected a list of {count} numbers")
    for idx, v in enumerate(value):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise InputError(f"{where}[{idx}]: expected a number, got {v!r}")
    return np.asarray(value, dtype=float)


def game_from_dict(doc: dict, where: str = "game") -> Game:
    """Parse and validate a game document."""
    if not isinstance(doc, dict):
        raise InputError(f"{where}: expected an object, got {type(doc).__name__}")
    n = _require(doc, "n", where)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InputError(f"{where}.n: expected a positive integer, got {n!r}")
    w = _number_list(_require(doc, "W", where), n * n, f"{where}.W").reshape(n, n)
    lower = _number_list(_require(doc, "lower", where), n, f"{where}.lower")
    upper = _number_list(_require(doc, "upper", where), n, f"{where}.upper")
    players = _require(doc, "players", where)
    if not isinstance(players, list) or len(players) != n:
        raise InputError(f"{where}.players: expected a list of {n} objects")
    values = []
    costs = []
    for i, entry in enumerate(players):
        if not isinstance(entry, dict):
            raise InputError(f"{where}.players[{i}]: expected an object")
        values.append(
            spec_from_dict(_require(entry, "value", f"{where}.players[{i}]"),
                           where=f"{where}.players[{i}].value")
        )
        costs.append(
            spec_from_dict(_require(entry, "cost", f"{where}.players[{i}]"),
                           where=f"{where}.players[{i}].cost")
        )
    return Game(w=w, lower=lower, upper=upper, values=tuple(values), costs=tuple(costs))


def game_to_dict(game: Game) -> dict:
    return {
        "n": game.n,
        "W": [float(v) for v in game.w.ravel()],
        "lower": [float(v) for v in game.lower],
        "upper": [float(v) for v in game.upper],
        "players": [
            {"value": spec_to_dict(game.values[i]), "cost": spec_to_dict(game.costs[i])}
            for i in range(game.n)
        ],
    }


def dumps_canonical(doc) -> str:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_game(path) -> Game:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read game file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return game_from_dict(doc, where=str(path))


def save_game(game: Game, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_canonical(game_to_dict(game)))
