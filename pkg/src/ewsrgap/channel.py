"""Gaussian partial-CSIT channel model and multi-cell scenario description.

A channel is distributed as H = mean + W @ sqrt(cov_t) with W i.i.d.
complex Gaussian of unit variance (1/2 per real component), so that
E (H - mean)(H - mean)^H = tr(cov_t) I and E (H - mean)^H (H - mean)
= N rows * cov_t. Scenarios couple several base stations and users;
per-user stacked views collect every link a user's rate depends on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import (
    DimensionMismatch,
    DomainError,
    IndexOutOfRange,
    ParseError,
    ValidationError,
)
from .mc import complex_normal


@dataclass
class ChannelDistribution:
    """One link's Gaussian CSIT: mean matrix plus transmit-side covariance.

    mean is N_r x M (may be zero), cov_t is M x M Hermitian PSD.
    """

    mean: np.ndarray
    cov_t: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=complex)
        self.cov_t = np.asarray(self.cov_t, dtype=complex)
        if self.mean.ndim != 2:
            raise DimensionMismatch(f"mean must be 2-d, got shape {self.mean.shape}")
        # hermitian_sqrt validates Hermitian PSD and is cached for sampling.
        self._sqrt = linalg.hermitian_sqrt(self.cov_t)
        if self.mean.shape[1] != self.cov_t.shape[0]:
            raise DimensionMismatch(
                f"mean has {self.mean.shape[1]} columns but cov_t is "
                f"{self.cov_t.shape[0]} x {self.cov_t.shape[0]}"
            )

    @property
    def n_rx(self) -> int:
        return self.mean.shape[0]

    @property
    def n_tx(self) -> int:
        return self.mean.shape[1]

    @property
    def cov_sqrt(self) -> np.ndarray:
        return self._sqrt


def sample_channel(dist: ChannelDistribution, rng: np.random.Generator) -> np.ndarray:
    """One channel realization H = mean + W @ sqrt(cov_t)."""
    W = complex_normal(rng, dist.mean.shape)
    return dist.mean + W @ dist.cov_sqrt


def expected_gram(dist: ChannelDistribution, Q) -> np.ndarray:
    """E[H Q H^H] = mean Q mean^H + tr(Q cov_t) I for Hermitian PSD Q."""
    Q = np.asarray(Q, dtype=complex)
    M = dist.n_tx
    if Q.shape != (M, M):
        raise DimensionMismatch(f"Q must be {M} x {M}, got {Q.shape}")
    G = dist.mean @ Q @ dist.mean.conj().T
    G = G + np.trace(Q @ dist.cov_t).real * np.eye(dist.n_rx)
    return 0.5 * (G + G.conj().T)


def exp_profile_cov(M: int, r: float = 0.5) -> np.ndarray:
    """Exponential correlation profile: entry (i, j) = r^|i-j|, trace M."""
    if not 0.0 <= r < 1.0:
        raise DomainError(f"correlation coefficient must be in [0, 1), got {r}")
    idx = np.arange(int(M))
    return (r ** np.abs(idx[:, None] - idx[None, :])).astype(complex)


@dataclass
class UserConfig:
    serving_bs: int
    rx_antennas: int
    streams: int
    rate_weight: float


@dataclass
class IbcScenario:
    """Cells, users, their association, power budgets, and all links.

    bs_antennas[j] is M_j; links[k][j] is the ChannelDistribution of
    user k seen from BS j (shape rx_antennas_k x M_j). seed, when set,
    is the file's suggested default RNG seed.
    """

    bs_antennas: list
    users: list
    power_budgets: list
    links: list
    seed: int | None = None

    def __post_init__(self):
        C = len(self.bs_antennas)
        if C == 0:
            raise ValidationError("scenario has no cells")
        if len(self.power_budgets) != C:
            raise ValidationError("power_budgets length differs from cell count")
        for j, P in enumerate(self.power_budgets):
            if not P > 0:
                raise ValidationError(f"power budget of cell {j} must be positive")
        if len(self.users) == 0:
            raise ValidationError("scenario has no users")
        if len(self.links) != len(self.users):
            raise ValidationError("links must have one row per user")
        for k, u in enumerate(self.users):
            if not (0 <= u.serving_bs < C):
                raise ValidationError(f"serving_bs of user {k} out of range")
            if u.rate_weight < 0:
                raise ValidationError(f"rate_weight of user {k} must be >= 0")
            if u.streams > u.rx_antennas:
                raise ValidationError("streams exceed rx antennas")
            if u.streams > self.bs_antennas[u.serving_bs]:
                raise ValidationError("streams exceed serving BS antennas")
            if u.streams < 1:
                raise ValidationError(f"user {k} must carry at least one stream")
            if len(self.links[k]) != C:
                raise ValidationError(f"user {k} needs a link to every cell")
            for j, link in enumerate(self.links[k]):
                expect = (u.rx_antennas, self.bs_antennas[j])
                if link.mean.shape != expect:
                    raise ValidationError(
                        f"link ({k},{j}) has shape {link.mean.shape}, expected {expect}"
                    )

    @property
    def n_cells(self) -> int:
        return len(self.bs_antennas)

    @property
    def n_users(self) -> int:
        return len(self.users)


@dataclass
class PrecoderSet:
    """Per-user beamformer matrices G_k of shape M_{b_k} x d_k."""

    matrices: list

    def __post_init__(self):
        self.matrices = [np.asarray(G, dtype=complex) for G in self.matrices]

    def Q_user(self, k: int) -> np.ndarray:
        G = self.matrices[k]
        return G @ G.conj().T


def check_precoders(scenario: IbcScenario, precoders: PrecoderSet) -> None:
    """Validate shapes and per-BS power against the scenario's budgets."""
    if len(precoders.matrices) != scenario.n_users:
        raise ValidationError("need one precoder per user")
    used = [0.0] * scenario.n_cells
    for k, u in enumerate(scenario.users):
        G = precoders.matrices[k]
        expect = (scenario.bs_antennas[u.serving_bs], u.streams)
        if G.shape != expect:
            raise ValidationError(
                f"precoder of user {k} has shape {G.shape}, expected {expect}"
            )
        used[u.serving_bs] += float(np.sum(np.abs(G) ** 2))
    for j, (spent, budget) in enumerate(zip(used, scenario.power_budgets)):
        if spent > budget + 1e-9:
            raise ValidationError(
                f"cell {j} spends power {spent:.6g} above budget {budget:.6g}"
            )


def uniform_power_precoders(scenario: IbcScenario) -> PrecoderSet:
    """Scaled-identity precoders that exactly meet each cell's budget.

    Every user served by cell j gets the first d_k columns of I_{M_j}
    scaled by a common per-cell amplitude.
    """
    streams_per_cell = [0] * scenario.n_cells
    for u in scenario.users:
        streams_per_cell[u.serving_bs] += u.streams
    mats = []
    for u in scenario.users:
        j = u.serving_bs
        alpha = np.sqrt(scenario.power_budgets[j] / streams_per_cell[j])
        G = np.zeros((scenario.bs_antennas[j], u.streams), dtype=complex)
        for c in range(u.streams):
            G[c, c] = alpha
        mats.append(G)
    ps = PrecoderSet(mats)
    check_precoders(scenario, ps)
    return ps


@dataclass
class StackedUserView:
    """User k's stacked channel along with the block-diagonal operators.

    Block i (one per user, width M_{b_i}) carries the link from user k
    to user i's serving BS, so users sharing a BS repeat the same
    physical link. Q stacks every user's transmit covariance; Q_kbar
    is Q with user k's own block zeroed. cov_bd is the block-diagonal
    transmit covariance matching the stacking.
    """

    user: int
    mean: np.ndarray
    block_slices: list
    block_bs: list
    cov_blocks: list
    Q: np.ndarray
    Q_kbar: np.ndarray
    cov_bd: np.ndarray
    # one perturbation square root per distinct BS, keyed by BS index
    bs_sqrt: dict = field(default_factory=dict)

    def as_distribution(self) -> ChannelDistribution:
        """The stacked (mean, cov) pair for expectation-only use.

        Valid for expected Grams under any block-diagonal Q: the
        repeated-link correlation between blocks never enters because
        block-diagonal quadratic forms have no cross-block terms.
        """
        return ChannelDistribution(mean=self.mean, cov_t=self.cov_bd)


def stack_user(scenario: IbcScenario, precoders: PrecoderSet, k: int) -> StackedUserView:
    """Assemble user k's stacked mean, covariance blocks, Q and Q_kbar."""
    if not (0 <= k < scenario.n_users):
        raise IndexOutOfRange(f"user index {k} out of range")
    check_precoders(scenario, precoders)
    widths = [scenario.bs_antennas[u.serving_bs] for u in scenario.users]
    total = sum(widths)
    N = scenario.users[k].rx_antennas
    mean = np.zeros((N, total), dtype=complex)
    Q = np.zeros((total, total), dtype=complex)
    Qbar = np.zeros((total, total), dtype=complex)
    cov_bd = np.zeros((total, total), dtype=complex)
    slices, block_bs, cov_blocks = [], [], []
    start = 0
    for i, u in enumerate(scenario.users):
        j = u.serving_bs
        sl = slice(start, start + widths[i])
        link = scenario.links[k][j]
        mean[:, sl] = link.mean
        Qi = precoders.Q_user(i)
        Q[sl, sl] = Qi
        if i != k:
            Qbar[sl, sl] = Qi
        cov_bd[sl, sl] = link.cov_t
        slices.append(sl)
        block_bs.append(j)
        cov_blocks.append(link.cov_t)
        start += widths[i]
    bs_sqrt = {
        j: scenario.links[k][j].cov_sqrt for j in sorted(set(block_bs))
    }
    return StackedUserView(
        user=k,
        mean=mean,
        block_slices=slices,
        block_bs=block_bs,
        cov_blocks=cov_blocks,
        Q=Q,
        Q_kbar=Qbar,
        cov_bd=cov_bd,
        bs_sqrt=bs_sqrt,
    )


def sample_stacked(view: StackedUserView, rng: np.random.Generator) -> np.ndarray:
    """One stacked realization; blocks sharing a BS reuse one draw."""
    return sample_stacked_batch(view, rng, 1)[0]


def sample_stacked_batch(view, rng: np.random.Generator, count: int) -> np.ndarray:
    """count stacked realizations, drawing one W per distinct BS.

    Draw order is ascending BS index, so results are reproducible for
    a given generator state regardless of where the call happens.
    """
    N = view.mean.shape[0]
    out = np.broadcast_to(view.mean, (count,) + view.mean.shape).copy()
    pert = {}
    for j in sorted(view.bs_sqrt):
        S = view.bs_sqrt[j]
        W = complex_normal(rng, (count, N, S.shape[0]))
        pert[j] = W @ S
    for sl, j in zip(view.block_slices, view.block_bs):
        out[:, :, sl] += pert[j]
    return out


# ---------------------------------------------------------------------------
# Scenario JSON serialization
# ---------------------------------------------------------------------------
#
# Top-level keys: cells, users, links, power_budgets, plus optional seed
# and precoders. Matrices are row-major nested lists whose entries are
# [re, im] pairs; a link mean of null stands for the zero matrix.


def _decode_matrix(obj, field_name):
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError("matrix must be a non-empty list of rows", field=field_name)
    width = len(obj[0])
    rows = []
    for r, row in enumerate(obj):
        if len(row) != width:
            raise ParseError("matrix rows have unequal lengths", field=field_name)
        vals = []
        for entry in row:
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) for x in entry)
            ):
                raise ParseError(
                    "matrix entries must be [re, im] pairs", field=field_name
                )
            vals.append(complex(entry[0], entry[1]))
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def _require(doc, key, kind, field_name=None):
    name = field_name or key
    if key not in doc:
        raise ParseError("missing required key", field=name)
    val = doc[key]
    if not isinstance(val, kind):
        raise ParseError(f"expected {kind.__name__}", field=name)
    return val


def load_scenario(path) -> IbcScenario:
    """Load and eagerly validate a scenario JSON document."""
    scenario, _, _ = load_bundle(path)
    return scenario


def load_bundle(path):
    """Load (scenario, precoders or None, seed or None) from one file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")

    cells = _require(doc, "cells", list)
    bs_antennas = []
    for j, cell in enumerate(cells):
        if not isinstance(cell, dict):
            raise ParseError("cell entries must be objects", field=f"cells[{j}]")
        m = _require(cell, "antennas", int, field_name=f"cells[{j}].antennas")
        bs_antennas.append(m)

    users_doc = _require(doc, "users", list)
    users = []
    for k, u in enumerate(users_doc):
        if not isinstance(u, dict):
            raise ParseError("user entries must be objects", field=f"users[{k}]")
        users.append(
            UserConfig(
                serving_bs=_require(u, "serving_bs", int, f"users[{k}].serving_bs"),
                rx_antennas=_require(u, "rx_antennas", int, f"users[{k}].rx_antennas"),
                streams=_require(u, "streams", int, f"users[{k}].streams"),
                rate_weight=float(
                    _require(u, "rate_weight", (int, float), f"users[{k}].rate_weight")
                ),
            )
        )

    budgets_doc = _require(doc, "power_budgets", list)
    budgets = []
    for j, P in enumerate(budgets_doc):
        if not isinstance(P, (int, float)):
            raise ParseError("power budgets must be numbers", field=f"power_budgets[{j}]")
        budgets.append(float(P))

    links_doc = _require(doc, "links", list)
    links = []
    for k, row in enumerate(links_doc):
        if not isinstance(row, list):
            raise ParseError("links must be a list of per-user rows", field=f"links[{k}]")
        link_row = []
        for j, entry in enumerate(row):
            fname = f"links[{k}][{j}]"
            if not isinstance(entry, dict):
                raise ParseError("link entries must be objects", field=fname)
            cov = _decode_matrix(
                _require(entry, "cov_t", list, f"{fname}.cov_t"), f"{fname}.cov_t"
            )
            if entry.get("mean") is None:
                n_rx = users[k].rx_antennas if k < len(users) else 0
                mean = np.zeros((n_rx, cov.shape[0]), dtype=complex)
            else:
                mean = _decode_matrix(entry["mean"], f"{fname}.mean")
            try:
                link_row.append(ChannelDistribution(mean=mean, cov_t=cov))
            except (DimensionMismatch, ValueError) as exc:
                raise ValidationError(f"link ({k},{j}) invalid: {exc}") from exc
        links.append(link_row)

    seed = doc.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ParseError("seed must be an integer", field="seed")

    scenario = IbcScenario(
        bs_antennas=bs_antennas,
        users=users,
        power_budgets=budgets,
        links=links,
        seed=seed,
    )

    precoders = None
    if doc.get("precoders") is not None:
        raw = doc["precoders"]
        if not isinstance(raw, list):
            raise ParseError("precoders must be a list", field="precoders")
        precoders = PrecoderSet(
            [_decode_matrix(G, f"precoders[{k}]") for k, G in enumerate(raw)]
        )
        check_precoders(scenario, precoders)
    return scenario, precoders, seed


def save_scenario(scenario: IbcScenario, path, precoders: PrecoderSet | None = None):
    """Write a scenario (and optional precoders) as round-trippable JSON."""
    doc = {
        "cells": [{"antennas": int(m)} for m in scenario.bs_antennas],
        "users": [
            {
                "serving_bs": u.serving_bs,
                "rx_antennas": u.rx_antennas,
                "streams": u.streams,
                "rate_weight": u.rate_weight,
            }
            for u in scenario.users
        ],
        "power_budgets": [float(P) for P in scenario.power_budgets],
        "links": [
            [
                {
                    "mean": None
                    if not np.any(link.mean)
                    else _encode_matrix(link.mean),
                    "cov_t": _encode_matrix(link.cov_t),
                }
                for link in row
            ]
            for row in scenario.links
        ],
    }
    if scenario.seed is not None:
        doc["seed"] = scenario.seed
    if precoders is not None:
        doc["precoders"] = [_encode_matrix(G) for G in precoders.matrices]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_demo_bundle():
    """The bundled two-cell four-user zero-mean demo scenario.

    Returns (scenario, precoders, seed) like load_bundle.
    """
    from importlib import resources

    ref = resources.files(__package__) / "data" / "demo_scenario.json"
    with resources.as_file(ref) as path:
        return load_bundle(path)
