"""JSON checkpoint of a :class:`~ddsc.engine.CurriculumState`.

Floats are written with ``repr`` precision so a save/load round trip is
exact.  nan is stored as ``null``.
"""

import json
import math
from pathlib import Path

import numpy as np

from .engine import CurriculumState
from .invariance import PrototypeBank
from .progress import SampleLedger
from .schedule import ScheduleConfig

FORMAT = "ddsc-checkpoint"
VERSION = 1

_LEDGER_FIELDS = ("prev_loss", "has_prev", "loss_sum", "loss_count", "D", "D_bar",
                  "H_tilde", "H_hat", "score", "weight")


class CheckpointError(ValueError):
    pass


def _enc(a):
    a = np.asarray(a)
    if a.dtype.kind == "f" and a.ndim > 1:
        return [_enc(row) for row in a]
    if a.dtype.kind == "f":
        return [None if math.isnan(x) else x for x in a.tolist()]
    return a.tolist()


def _dec(v, dtype=float):
    # numpy maps None -> nan for float arrays
    return np.array(v, dtype=dtype)


def state_to_dict(state: CurriculumState) -> dict:
    led = state.ledger
    return {
        "format": FORMAT,
        "version": VERSION,
        "strategy": state.strategy,
        "epoch": state.epoch,
        "rng_seed": state.rng_seed,
        "batch_size": state.batch_size,
        "config": state.config.to_dict(),
        "bank": {
            "n_devices": state.bank.n_devices,
            "dim": state.bank.dim,
            "gamma": state.bank.gamma,
            "epoch_of_last_update": state.bank.epoch_of_last_update,
            "seen": _enc(state.bank.seen),
            "prototypes": _enc(state.bank.prototypes),
        },
        "ledger": {
            "n": led.n,
            "epochs_finalized": led.epochs_finalized,
            "open_phase": led.open_phase,
            **{k: _enc(getattr(led, k)) for k in _LEDGER_FIELDS},
        },
        "epoch_weights": _enc(state.epoch_weights),
        "next_weights": _enc(state.next_weights),
        "last_embeddings": _enc(state.last_embeddings),
        "policy_state": state.policy_state,
    }


def state_from_dict(d: dict) -> CurriculumState:
    if d.get("format") != FORMAT:
        raise CheckpointError("not a ddsc checkpoint")
    if d.get("version") != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {d.get('version')!r}")
    b = d["bank"]
    bank = PrototypeBank(b["n_devices"], b["dim"], b["gamma"], _dec(b["prototypes"]),
                         _dec(b["seen"], bool), b["epoch_of_last_update"])
    lg = d["ledger"]
    types = {"has_prev": bool, "loss_count": np.int64}
    ledger = SampleLedger(
        lg["n"],
        epochs_finalized=lg["epochs_finalized"],
        open_phase=lg["open_phase"],
        **{k: _dec(lg[k], types.get(k, float)) for k in _LEDGER_FIELDS},
    )
    return CurriculumState(
        config=ScheduleConfig(**d["config"]),
        bank=bank,
        ledger=ledger,
        rng_seed=d["rng_seed"],
        batch_size=d["batch_size"],
        epoch=d["epoch"],
        epoch_weights=_dec(d["epoch_weights"]),
        next_weights=_dec(d["next_weights"]),
        last_embeddings=_dec(d["last_embeddings"]).reshape(lg["n"], b["dim"]),
        strategy=d["strategy"],
        policy_state=d.get("policy_state", {}),
    )


def save_checkpoint(state: CurriculumState, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(state_to_dict(state), separators=(",", ":")) + "\n")
    return path


def load_checkpoint(path) -> CurriculumState:
    try:
        return state_from_dict(json.loads(Path(path).read_text()))
    except CheckpointError:
        raise
    except (OSError, ValueError, KeyError, TypeError, IndexError) as exc:
        raise CheckpointError(f"unreadable checkpoint: {exc}") from exc
