"""Binary checkpoints for states and trajectories.

Layout, all integers little-endian u32 unless noted:

    8 bytes   magic ``LFMHD1\\0\\0``
    u32       format version (currently 1)
    3 x u32   grid dims n1, n2, n3 (the lattice holds n3 + 1 levels)
    u32       field count
    per field u32 name length, ASCII name, then n1*n2*(n3+1) float64
              little-endian values, y3-major (y3 slowest, y1 fastest)

Every payload is one scalar lattice; vectors are stored component-wise
(``v1``..``v3``), trajectory snapshots under ``snapNNN.`` prefixes, and
scalar metadata (time, smoothing scale, step) as constant lattices so
the format stays uniform.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Grid, GridSpec
from .linear_step import Trajectory
from .state import EquationOfState, FlowState

MAGIC = b"LFMHD1\x00\x00"
VERSION = 1


class CheckpointError(Exception):
    """Raised when a file fails the magic/version/dims validation."""


def _to_wire(field: np.ndarray) -> bytes:
    return np.ascontiguousarray(field.transpose(2, 1, 0), dtype="<f8").tobytes()


def _from_wire(raw: bytes, dims: tuple[int, int, int]) -> np.ndarray:
    n1, n2, n3 = dims
    arr = np.frombuffer(raw, dtype="<f8").reshape(n3 + 1, n2, n1)
    return np.ascontiguousarray(arr.transpose(2, 1, 0))


def write_fields(path: str | Path, dims: tuple[int, int, int],
                 fields: dict[str, np.ndarray]) -> None:
    n1, n2, n3 = dims
    shape = (n1, n2, n3 + 1)
    blob = [MAGIC, struct.pack("<IIIII", VERSION, n1, n2, n3, len(fields))]
    for name, field in fields.items():
        if field.shape != shape:
            raise CheckpointError(
                f"field {name!r} has shape {field.shape}, lattice wants {shape}"
            )
        encoded = name.encode("ascii")
        blob.append(struct.pack("<I", len(encoded)))
        blob.append(encoded)
        blob.append(_to_wire(field))
    Path(path).write_bytes(b"".join(blob))


def read_fields(path: str | Path) -> tuple[tuple[int, int, int], dict[str, np.ndarray]]:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 20:
        raise CheckpointError(f"{path}: file too short for a checkpoint header")
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {raw[:8]!r}, expected {MAGIC!r}")
    version, n1, n2, n3, count = struct.unpack_from("<IIIII", raw, 8)
    if version != VERSION:
        raise CheckpointError(
            f"{path}: unsupported version {version}, expected {VERSION} "
            "(values this large usually mean a byte-swapped file; "
            "the format is little-endian only)"
        )
    if not (8 <= n1 <= 4096 and 8 <= n2 <= 4096 and 8 <= n3 <= 4096):
        raise CheckpointError(f"{path}: implausible grid dims ({n1}, {n2}, {n3})")
    payload = n1 * n2 * (n3 + 1) * 8
    offset = 28
    fields: dict[str, np.ndarray] = {}
    for _ in range(count):
        if offset + 4 > len(raw):
            raise CheckpointError(f"{path}: truncated before a field name length")
        (name_len,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        if offset + name_len + payload > len(raw):
            raise CheckpointError(
                f"{path}: truncated field data, dims ({n1}, {n2}, {n3}) "
                f"need {payload} bytes per field"
            )
        name = raw[offset:offset + name_len].decode("ascii")
        offset += name_len
        fields[name] = _from_wire(raw[offset:offset + payload], (n1, n2, n3))
        offset += payload
    return (n1, n2, n3), fields


# ----------------------------------------------------------------------
# state and trajectory encodings


def _state_fields(state: FlowState) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {"t": np.full(state.grid.shape, state.t)}
    for alpha in range(3):
        out[f"eta{alpha + 1}"] = state.eta[alpha]
        out[f"v{alpha + 1}"] = state.v[alpha]
        out[f"b{alpha + 1}"] = state.b[alpha]
    out["q"] = state.q
    out["rho0"] = state.rho0
    return out


def _state_from_fields(grid: Grid, eos: EquationOfState,
                       fields: dict[str, np.ndarray], prefix: str = "") -> FlowState:
    def get(name: str) -> np.ndarray:
        key = prefix + name
        if key not in fields:
            raise CheckpointError(f"missing field {key!r}")
        return fields[key]

    return FlowState(
        grid=grid,
        eos=eos,
        t=float(get("t").flat[0]),
        eta=np.stack([get(f"eta{alpha + 1}") for alpha in range(3)]),
        v=np.stack([get(f"v{alpha + 1}") for alpha in range(3)]),
        b=np.stack([get(f"b{alpha + 1}") for alpha in range(3)]),
        q=get("q"),
        rho0=get("rho0"),
    )


def write_state(path: str | Path, state: FlowState) -> None:
    spec = state.grid.spec
    write_fields(path, (spec.n1, spec.n2, spec.n3), _state_fields(state))


def read_state(path: str | Path, eos: EquationOfState | None = None,
               dealias_fraction: float = 2.0 / 3.0) -> FlowState:
    dims, fields = read_fields(path)
    grid = Grid(GridSpec(*dims, dealias_fraction=dealias_fraction))
    return _state_from_fields(grid, eos or EquationOfState(), fields)


def write_trajectory(path: str | Path, traj: Trajectory) -> None:
    spec = traj.grid.spec
    shape = traj.grid.shape
    fields: dict[str, np.ndarray] = {
        "meta.kappa": np.full(shape, traj.kappa),
        "meta.dt": np.full(shape, traj.dt),
        "meta.nodes": np.full(shape, float(len(traj))),
    }
    for j, state in enumerate(traj.states):
        prefix = f"snap{j:03d}."
        for name, field in _state_fields(state).items():
            fields[prefix + name] = field
    write_fields(path, (spec.n1, spec.n2, spec.n3), fields)


def read_trajectory(path: str | Path, eos: EquationOfState | None = None,
                    dealias_fraction: float = 2.0 / 3.0) -> Trajectory:
    dims, fields = read_fields(path)
    grid = Grid(GridSpec(*dims, dealias_fraction=dealias_fraction))
    eos = eos or EquationOfState()
    for key in ("meta.kappa", "meta.dt", "meta.nodes"):
        if key not in fields:
            raise CheckpointError(f"{path}: missing field {key!r}; not a trajectory checkpoint")
    nodes = int(fields["meta.nodes"].flat[0])
    states = [
        _state_from_fields(grid, eos, fields, prefix=f"snap{j:03d}.")
        for j in range(nodes)
    ]
    return Trajectory(
        grid=grid,
        eos=eos,
        kappa=float(fields["meta.kappa"].flat[0]),
        dt=float(fields["meta.dt"].flat[0]),
        states=states,
    )
