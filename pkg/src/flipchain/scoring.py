"""Plan-quality scores, the combined energy, and election evaluation."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence, TextIO, Union

import numpy as np

from .partition import DistrictStats, Partition

StatsLike = Union[Partition, Sequence[DistrictStats]]


def _stats(x: StatsLike) -> Sequence[DistrictStats]:
    return x.stats if isinstance(x, Partition) else x


def compact_term(area: float, circumference: float) -> float:
    return math.sqrt(area) / circumference


def compact_score(plan: StatsLike) -> float:
    """Sum over districts of sqrt(area) / circumference; higher is more compact."""
    c = 0.0
    for s in _stats(plan):
        c += math.sqrt(s.area) / s.circumference
    return c


def balanced_from_populations(pops: Sequence[int]) -> float:
    k = len(pops)
    if k < 2:
        raise ValueError("balanced score needs K >= 2")
    total = int(sum(int(p) for p in pops))
    if total <= 0:
        raise ValueError("balanced score needs positive total population")
    mean = total / k
    ss = 0.0
    for p in pops:
        d = int(p) - mean
        ss += d * d
    return k * math.sqrt(ss) / ((k - 1) * total)


def balanced_score(plan: StatsLike) -> float:
    """K * sqrt(sum (P_j - mean)^2) / ((K - 1) * sum P_j); 0 is perfectly balanced."""
    return balanced_from_populations([s.population for s in _stats(plan)])


def max_population_deviation(plan: StatsLike) -> float:
    """Largest |P_j - mean| / mean over districts."""
    pops = [s.population for s in _stats(plan)]
    mean = sum(pops) / len(pops)
    return max(abs(p - mean) / mean for p in pops)


@dataclass(frozen=True)
class ScoreWeights:
    w_balance: float = 1.0
    w_compact: float = 1.0

    def __post_init__(self):
        if self.w_balance < 0 or self.w_compact < 0:
            raise ValueError("score weights must be nonnegative")

    @classmethod
    def parse(cls, text: str) -> "ScoreWeights":
        """Parse ``wb:wc``."""
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"bad weights {text!r}; expected <w_balance>:<w_compact>")
        return cls(float(parts[0]), float(parts[1]))


def energy(plan: StatsLike, weights: ScoreWeights = ScoreWeights()) -> float:
    """w_balance * balanced + w_compact * (K/4 - compact); lower is better.

    A zero weight skips its term entirely, so a single-district plan has a
    defined energy when ``w_balance == 0``.
    """
    stats = _stats(plan)
    e = 0.0
    if weights.w_balance != 0.0:
        e += weights.w_balance * balanced_score(stats)
    if weights.w_compact != 0.0:
        e += weights.w_compact * (len(stats) / 4.0 - compact_score(stats))
    return e


# ---------------------------------------------------------------- elections


class VoteTableError(ValueError):
    pass


@dataclass(frozen=True)
class VoteTable:
    parties: tuple[str, ...]
    counts: np.ndarray  # (M, P) nonnegative integers

    def __post_init__(self):
        if len(set(self.parties)) != len(self.parties):
            raise VoteTableError("party names must be unique")
        if self.counts.ndim != 2 or self.counts.shape[1] != len(self.parties):
            raise VoteTableError("vote counts must be an (M, parties) array")
        if (self.counts < 0).any():
            raise VoteTableError("vote counts must be nonnegative")


def load_votes(stream: TextIO | str, n_units: int) -> VoteTable:
    """Read ``unit_id,<party1>,<party2>,...`` CSV covering every unit."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise VoteTableError("empty vote file") from None
    if not header or header[0].strip() != "unit_id" or len(header) < 2:
        raise VoteTableError("header must be unit_id,<party1>,...")
    parties = tuple(h.strip() for h in header[1:])
    counts = np.full((n_units, len(parties)), -1, dtype=np.int64)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise VoteTableError(f"line {lineno}: expected {len(header)} fields")
        try:
            u = int(row[0])
            vals = [int(c) for c in row[1:]]
        except ValueError:
            raise VoteTableError(f"line {lineno}: non-integer field") from None
        if not 0 <= u < n_units:
            raise VoteTableError(f"line {lineno}: unknown unit {u}")
        if counts[u, 0] >= 0:
            raise VoteTableError(f"line {lineno}: unit {u} listed twice")
        if min(vals) < 0:
            raise VoteTableError(f"line {lineno}: negative vote count")
        counts[u] = vals
    missing = np.flatnonzero(counts[:, 0] < 0)
    if missing.size:
        raise VoteTableError(f"vote table is missing unit {int(missing[0])}")
    return VoteTable(parties, counts)


def save_votes(votes: VoteTable) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("unit_id",) + votes.parties)
    for u, row in enumerate(votes.counts):
        w.writerow([u] + [int(x) for x in row])
    return out.getvalue()


@dataclass(frozen=True)
class ElectionResult:
    parties: tuple[str, ...]
    district_votes: np.ndarray  # (K, P)
    winners: tuple[str, ...]
    ties: tuple[bool, ...]
    seats: dict[str, float]
    seat_share: dict[str, float]
    vote_share: dict[str, float]

    def summary(self) -> str:
        lines = [f"district {j}: {w}" + (" (tie)" if t else "")
                 for j, (w, t) in enumerate(zip(self.winners, self.ties))]
        for p in self.parties:
            s = self.seats[p]
            s_txt = f"{s:g}"
            lines.append(
                f"{p}: {s_txt} seat{'s' if s != 1 else ''} ({100 * self.seat_share[p]:.1f}% of seats), "
                f"{100 * self.vote_share[p]:.1f}% of votes"
            )
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["district"] + list(self.parties) + ["winner", "tie"])
        for j, row in enumerate(self.district_votes):
            w.writerow([j] + [int(x) for x in row] + [self.winners[j], int(self.ties[j])])
        w.writerow(["% of votes"] + [f"{100 * self.vote_share[p]:.1f}" for p in self.parties] + ["", ""])
        w.writerow(["% of seats"] + [f"{100 * self.seat_share[p]:.1f}" for p in self.parties] + ["", ""])
        return out.getvalue()


def evaluate_election(partition: Partition, votes: VoteTable) -> ElectionResult:
    """Plurality winner per district, then statewide seat and vote shares.

    A plurality tie names the alphabetically first tied party as winner, sets
    the district's tie flag and splits the seat evenly among the tied parties.
    """
    if votes.counts.shape[0] != partition.graph.n_units:
        raise VoteTableError("vote table does not cover every unit")
    k = partition.k
    parties = votes.parties
    dv = np.zeros((k, len(parties)), dtype=np.int64)
    np.add.at(dv, partition.assignment, votes.counts)
    seats = {p: 0.0 for p in parties}
    winners, ties = [], []
    for j in range(k):
        top = dv[j].max()
        tied = sorted(parties[i] for i in np.flatnonzero(dv[j] == top))
        winners.append(tied[0])
        ties.append(len(tied) > 1)
        for p in tied:
            seats[p] += 1.0 / len(tied)
    grand = int(dv.sum())
    totals = dv.sum(axis=0)
    vote_share = {p: (int(totals[i]) / grand if grand else 0.0) for i, p in enumerate(parties)}
    seat_share = {p: seats[p] / k for p in parties}
    return ElectionResult(parties, dv, tuple(winners), tuple(ties), seats, seat_share, vote_share)
