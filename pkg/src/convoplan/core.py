"""Shared domain types: candidates, conversations, actions, observations, hyperparameters.

All types here are immutable values and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterator, Mapping


class SchemaError(ValueError):
    """An attribute name is not part of the dataset's attribute schema."""


class EmptyPruneError(RuntimeError):
    """Pruning removed every live candidate; the caller must roll back."""


ASK = "ask"
COMMIT = "commit"

OPTION = "option"
NONE_OF_THESE = "none_of_these"
ACCEPT = "accept"
REJECT = "reject"


@dataclass(frozen=True)
class Candidate:
    """One hypothesis: a target the user may be after.

    ``attributes`` maps attribute name to a value string; a missing key means
    the value is unknown for this candidate, which never causes pruning.
    """

    id: str
    text: str
    attributes: Mapping[str, str] = field(default_factory=dict)

    def value_of(self, attribute: str) -> str | None:
        return self.attributes.get(attribute)


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    values: tuple[str, ...] | None = None  # None means open vocabulary


@dataclass(frozen=True)
class AttributeSchema:
    attributes: tuple[AttributeSpec, ...] = ()

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes]
        if len(names) != len(set(names)):
            raise SchemaError("duplicate attribute names in schema")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def validate_candidates(self, candidates: CandidateSet) -> None:
        known = set(self.names)
        for cand in candidates:
            unknown = set(cand.attributes) - known
            if unknown:
                raise SchemaError(
                    f"candidate {cand.id!r} has attributes outside the schema: {sorted(unknown)}"
                )


@dataclass(frozen=True)
class CandidateSet:
    """Ordered set of live candidates; shrinks monotonically across turns."""

    members: tuple[Candidate, ...]

    def __post_init__(self) -> None:
        ids = [c.id for c in self.members]
        if len(ids) != len(set(ids)):
            raise ValueError("candidate ids must be unique within a set")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self.members)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.members)

    def get(self, candidate_id: str) -> Candidate:
        for cand in self.members:
            if cand.id == candidate_id:
                return cand
        raise KeyError(candidate_id)

    def __contains__(self, candidate_id: object) -> bool:
        return any(c.id == candidate_id for c in self.members)

    def texts(self) -> tuple[str, ...]:
        return tuple(c.text for c in self.members)

    def attribute_column(self, attribute: str) -> tuple[str | None, ...]:
        return tuple(c.value_of(attribute) for c in self.members)


@dataclass(frozen=True)
class Turn:
    speaker: str  # "agent" | "user"
    text: str


@dataclass(frozen=True)
class ConversationHistory:
    """Conversation so far; the latest user turn holds the latest response."""

    turns: tuple[Turn, ...]

    def __len__(self) -> int:
        return len(self.turns)

    def joined_text(self) -> str:
        return "\n".join(t.text for t in self.turns)

    def append(self, speaker: str, text: str) -> ConversationHistory:
        return ConversationHistory(self.turns + (Turn(speaker, text),))

    @classmethod
    def from_texts(cls, *texts: str, speaker: str = "user") -> ConversationHistory:
        return cls(tuple(Turn(speaker, t) for t in texts))


@dataclass(frozen=True)
class Action:
    """Either Ask(attribute, options) or Commit(candidate id).

    An ask's observation space is one outcome per option plus a
    "none of these" outcome covering answers outside the option list.
    A commit's observation space is {accept, reject}.
    """

    kind: str
    attribute: str | None = None
    options: tuple[str, ...] = ()
    candidate_id: str | None = None

    @classmethod
    def make_ask(cls, attribute: str, options: tuple[str, ...] | list[str]) -> Action:
        options = tuple(options)
        if len(options) < 2:
            raise ValueError("an ask needs at least two options")
        return cls(kind=ASK, attribute=attribute, options=options)

    @classmethod
    def make_commit(cls, candidate_id: str) -> Action:
        return cls(kind=COMMIT, candidate_id=candidate_id)

    @property
    def is_ask(self) -> bool:
        return self.kind == ASK

    @property
    def is_commit(self) -> bool:
        return self.kind == COMMIT

    def observations(self) -> tuple[Observation, ...]:
        if self.is_ask:
            opts = tuple(
                Observation(action=self, outcome=OPTION, option_index=i)
                for i in range(len(self.options))
            )
            return opts + (Observation(action=self, outcome=NONE_OF_THESE),)
        return (
            Observation(action=self, outcome=ACCEPT),
            Observation(action=self, outcome=REJECT),
        )

    def describe(self) -> str:
        if self.is_ask:
            return f"ask({self.attribute}: {', '.join(self.options)})"
        return f"commit({self.candidate_id})"


@dataclass(frozen=True)
class Observation:
    """A user reply, reduced to one outcome of the action's observation set."""

    action: Action
    outcome: str  # OPTION | NONE_OF_THESE | ACCEPT | REJECT
    option_index: int | None = None
    text: str | None = None

    def __post_init__(self) -> None:
        valid = {OPTION, NONE_OF_THESE} if self.action.is_ask else {ACCEPT, REJECT}
        if self.outcome not in valid:
            raise ValueError(f"outcome {self.outcome!r} invalid for {self.action.kind}")
        if self.outcome == OPTION:
            if self.option_index is None or not (
                0 <= self.option_index < len(self.action.options)
            ):
                raise ValueError("option outcome needs a valid option index")

    @property
    def option_value(self) -> str | None:
        if self.outcome == OPTION and self.option_index is not None:
            return self.action.options[self.option_index]
        return None

    def key(self) -> tuple:
        """Hashable identity of the outcome, used to index search-tree branches."""
        return (self.outcome, self.option_index)


@dataclass(frozen=True)
class PlannerConfig:
    budget: int = 50
    exploration: float = 1.4
    discount: float = 0.99
    rollout: str = "greedy"  # "greedy" | "random"


@dataclass(frozen=True)
class RewardConfig:
    turn_penalty: float = 0.1
    info_bonus: float = 0.2
    failure_penalty: float = 0.5


@dataclass(frozen=True)
class TriggerConfig:
    entropy_ratio: float = 0.5
    max_belief: float = 0.8
    max_turns: int = 5


@dataclass(frozen=True)
class UpdateConfig:
    history_influence: float = 1.0


@dataclass(frozen=True)
class HyperParams:
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    trigger: TriggerConfig = field(default_factory=TriggerConfig)
    update: UpdateConfig = field(default_factory=UpdateConfig)

    def __post_init__(self) -> None:
        p, r, t, u = self.planner, self.reward, self.trigger, self.update
        if p.budget <= 0 or p.exploration <= 0:
            raise ValueError("planner budget and exploration must be positive")
        if not 0.0 < p.discount <= 1.0:
            raise ValueError("discount must lie in (0, 1]")
        if min(r.turn_penalty, r.info_bonus, r.failure_penalty) <= 0:
            raise ValueError("reward weights must be positive")
        if not (0.0 < t.entropy_ratio < 1.0 and 0.0 < t.max_belief < 1.0):
            raise ValueError("trigger thresholds must lie in (0, 1)")
        if t.max_turns <= 0:
            raise ValueError("max_turns must be positive")
        if u.history_influence < 0:
            raise ValueError("history influence must be nonnegative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "budget": self.planner.budget,
            "exploration": self.planner.exploration,
            "discount": self.planner.discount,
            "rollout": self.planner.rollout,
            "turn_penalty": self.reward.turn_penalty,
            "info_bonus": self.reward.info_bonus,
            "failure_penalty": self.reward.failure_penalty,
            "entropy_ratio": self.trigger.entropy_ratio,
            "max_belief": self.trigger.max_belief,
            "max_turns": self.trigger.max_turns,
            "history_influence": self.update.history_influence,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> HyperParams:
        base = cls()
        return cls(
            planner=replace(
                base.planner,
                budget=int(data.get("budget", base.planner.budget)),
                exploration=float(data.get("exploration", base.planner.exploration)),
                discount=float(data.get("discount", base.planner.discount)),
                rollout=str(data.get("rollout", base.planner.rollout)),
            ),
            reward=replace(
                base.reward,
                turn_penalty=float(data.get("turn_penalty", base.reward.turn_penalty)),
                info_bonus=float(data.get("info_bonus", base.reward.info_bonus)),
                failure_penalty=float(
                    data.get("failure_penalty", base.reward.failure_penalty)
                ),
            ),
            trigger=replace(
                base.trigger,
                entropy_ratio=float(data.get("entropy_ratio", base.trigger.entropy_ratio)),
                max_belief=float(data.get("max_belief", base.trigger.max_belief)),
                max_turns=int(data.get("max_turns", base.trigger.max_turns)),
            ),
            update=replace(
                base.update,
                history_influence=float(
                    data.get("history_influence", base.update.history_influence)
                ),
            ),
        )


def consistent(
    candidate: Candidate, obs: Observation, schema: AttributeSchema | None = None
) -> bool:
    """Whether ``candidate`` could have produced ``obs``.

    Candidates with no value for the asked attribute are consistent with every
    outcome of that ask: missing data never prunes.
    """
    action = obs.action
    if action.is_commit:
        if obs.outcome == ACCEPT:
            return candidate.id == action.candidate_id
        return candidate.id != action.candidate_id

    attribute = action.attribute or ""
    if schema is not None and attribute not in schema:
        raise SchemaError(f"unknown attribute {attribute!r}")
    value = candidate.value_of(attribute)
    if value is None:
        return True
    if obs.outcome == OPTION:
        return value == obs.option_value
    return value not in action.options


def prune(
    candidates: CandidateSet, obs: Observation, schema: AttributeSchema | None = None
) -> CandidateSet:
    """Candidates consistent with ``obs``, order preserved.

    Raises :class:`EmptyPruneError` when nothing survives; the episode loop
    rolls back to the pre-observation set in that case.
    """
    if len(candidates) == 0:
        raise ValueError("cannot prune an empty candidate set")
    kept = tuple(c for c in candidates if consistent(c, obs, schema))
    if not kept:
        raise EmptyPruneError(f"observation {obs.outcome!r} contradicts every candidate")
    return CandidateSet(kept)
