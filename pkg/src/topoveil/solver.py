"""Embedded CDCL satisfiability procedure with DIMACS interchange.

Clauses are lists of non-zero integers in DIMACS convention (variable v is
the literal v, its negation -v). The solver is incremental: clauses may be
added between ``solve`` calls and learned clauses persist, which is what
the distinguishing-input loop of the attack harness relies on. The engine
is pluggable there; anything honoring this class's small surface (or an
external tool fed through :func:`to_dimacs`) can stand in.

Implementation: two-watched-literal propagation, first-UIP conflict
learning with non-chronological backjumping, exponential VSIDS-style
activity decay, phase saving, and geometric restarts. Decision order and
initial phases are seeded so attack runs are reproducible per seed.
"""

from __future__ import annotations

from .rng import SplitMix64


class CdclSolver:
    def __init__(self, seed: int = 0):
        self._rng = SplitMix64(seed)
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, int | None] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.activity: dict[int, float] = {}
        self.phase: dict[int, bool] = {}
        self.var_inc = 1.0
        self.unsat = False
        self._qhead = 0

    # -- variables and clauses -------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.activity[v] = self._rng.next_u64() / 2**64 * 1e-6
        self.phase[v] = bool(self._rng.next_u64() & 1)
        return v

    def ensure_vars(self, upto: int) -> None:
        while self.nvars < upto:
            self.new_var()

    def add_clause(self, lits: list[int]) -> None:
        lits = sorted(set(lits), key=abs)
        if any(-l in lits for l in lits):
            return  # tautology
        self.ensure_vars(max((abs(l) for l in lits), default=0))
        if not lits:
            self.unsat = True
            return
        ci = len(self.clauses)
        self.clauses.append(lits)
        if len(lits) >= 2:
            self.watches.setdefault(lits[0], []).append(ci)
            self.watches.setdefault(lits[1], []).append(ci)

    def add_clauses(self, clauses) -> None:
        for c in clauses:
            self.add_clause(list(c))

    # -- assignment machinery ----------------------------------------------

    def _value(self, lit: int):
        v = self.assign.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def _enqueue(self, lit: int, reason: int | None) -> bool:
        val = self._value(lit)
        if val is not None:
            return val
        var = abs(lit)
        self.assign[var] = lit > 0
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> int | None:
        """Exhaust unit propagation; returns a conflicting clause index or None."""
        while self._qhead < len(self.trail):
            lit = self.trail[self._qhead]
            self._qhead += 1
            falsified = -lit
            watch_list = self.watches.get(falsified, [])
            i = 0
            while i < len(watch_list):
                ci = watch_list[i]
                c = self.clauses[ci]
                # normalize: put the falsified literal at position 1
                if c[0] == falsified:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if self._value(first) is True:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    if self._value(c[k]) is not False:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(ci)
                        watch_list[i] = watch_list[-1]
                        watch_list.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self._value(first) is False:
                    return ci  # conflict
                self._enqueue(first, ci)
                i += 1
        return None

    def _bump(self, var: int) -> None:
        self.activity[var] = self.activity.get(var, 0.0) + self.var_inc
        if self.activity[var] > 1e100:
            for v in self.activity:
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP learning; returns (learnt clause, backjump level)."""
        learnt: list[int] = []
        seen: set[int] = set()
        counter = 0
        p: int | None = None
        index = len(self.trail) - 1
        cur_level = len(self.trail_lim)

        while True:
            for lit in self.clauses[confl]:
                if p is not None and lit == p:
                    continue  # the literal this reason clause propagated
                var = abs(lit)
                if var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                self._bump(var)
                if self.level[var] == cur_level:
                    counter += 1
                else:
                    learnt.append(lit)
            while abs(self.trail[index]) not in seen:
                index -= 1
            p = self.trail[index]
            index -= 1
            seen.discard(abs(p))
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[abs(p)]
        learnt.append(-p)

        if len(learnt) == 1:
            bt = 0
        else:
            levels = sorted((self.level[abs(l)] for l in learnt[:-1]), reverse=True)
            bt = levels[0]
        return learnt, bt

    def _backtrack(self, target_level: int) -> None:
        if len(self.trail_lim) <= target_level:
            return
        limit = self.trail_lim[target_level]
        for lit in self.trail[limit:]:
            var = abs(lit)
            self.phase[var] = self.assign[var]
            del self.assign[var]
            del self.level[var]
            del self.reason[var]
        del self.trail[limit:]
        del self.trail_lim[target_level:]
        self._qhead = min(self._qhead, len(self.trail))

    def _decide(self) -> int | None:
        best, best_act = 0, -1.0
        for v in range(1, self.nvars + 1):
            if v not in self.assign and self.activity.get(v, 0.0) > best_act:
                best, best_act = v, self.activity.get(v, 0.0)
        if best == 0:
            return None
        return best if self.phase.get(best, False) else -best

    # -- main loop ----------------------------------------------------------

    def solve(self) -> bool:
        if self.unsat:
            return False
        self._backtrack(0)
        self.trail.clear()
        self.assign.clear()
        self.level.clear()
        self.reason.clear()
        self._qhead = 0
        for c in self.clauses:
            if len(c) == 1 and not self._enqueue(c[0], None):
                return False

        conflicts = 0
        restart_limit = 100.0
        while True:
            confl = self._propagate()
            if confl is not None:
                if not self.trail_lim:
                    return False
                conflicts += 1
                learnt, bt = self._analyze(confl)  # learnt[-1] asserts
                self._backtrack(bt)
                self.var_inc *= 1.05
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], None):
                        return False
                    self.clauses.append(learnt)
                else:
                    # watch the asserting literal plus one backjump-level literal
                    rest = sorted(learnt[:-1],
                                  key=lambda l: -self.level.get(abs(l), 0))
                    clause = [learnt[-1]] + rest
                    ci = len(self.clauses)
                    self.clauses.append(clause)
                    self.watches.setdefault(clause[0], []).append(ci)
                    self.watches.setdefault(clause[1], []).append(ci)
                    self._enqueue(clause[0], ci)
                if conflicts >= restart_limit:
                    restart_limit *= 1.5
                    self._backtrack(0)
                continue
            lit = self._decide()
            if lit is None:
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)

    def model(self) -> dict[int, bool]:
        return {v: self.assign.get(v, False) for v in range(1, self.nvars + 1)}


def to_dimacs(nvars: int, clauses, comments: list[str] | None = None) -> str:
    lines = [f"c {c}" for c in (comments or [])]
    lines.append(f"p cnf {nvars} {len(list(clauses))}")
    body = [" ".join(str(l) for l in c) + " 0" for c in clauses]
    return "\n".join(lines + body) + "\n"


def from_dimacs(text: str) -> tuple[int, list[list[int]]]:
    nvars = 0
    clauses: list[list[int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            nvars = int(parts[2])
            continue
        lits = [int(x) for x in line.split()]
        if lits and lits[-1] == 0:
            lits = lits[:-1]
        if lits:
            clauses.append(lits)
    return nvars, clauses
