"""Prompt templates and the text fragments they interpolate.

Templates live as plain text files under ``assets/`` with ``{placeholder}``
slots; rendering is strict about the slots a template requires. The rules
and observation-conversion texts describe the game exactly as the engine
plays it.
"""

from __future__ import annotations

import string
from functools import lru_cache
from importlib import resources

from ..engine import card_name

GAME_NAME = "Leduc Hold'em"
DEFAULT_AGENT_NAME = "hero"
DEFAULT_RECIPIENT_NAME = "villain"

SYSTEM_MESSAGE = (
    "You are an expert poker player. Answer concisely and follow the "
    "requested output format exactly."
)

RULES_TEXT = (
    "Leduc Hold'em is played with a deck of only two cards each of King, "
    "Queen and Jack, six cards in total. Each game has two players and two "
    "betting rounds, with a two-bet maximum in each round. Every player is "
    "dealt one private card; one public card is revealed at the start of the "
    "second round. There are four actions: raise, call, check and fold. "
    "Raise action: in the first round you put chips so that your total in "
    "the pot is 2 more than your opponent's; in the second round, 4 more. "
    "Call action: you match your opponent's chips in the pot when his are "
    "higher than yours. Check action: you pass on the opportunity to bet. "
    "Fold action: you drop out and lose the chips you already put in the "
    "pot. At the start of a game one player puts 1 chip in the pot as small "
    "blind and the other puts 2 chips as big blind; the small blind acts "
    "first. Single game win/draw/lose rule: the player whose hand has the "
    "same rank as the public card wins; if neither matches, the higher rank "
    "wins; equal ranks draw. A fold hands the game to the opponent. Winning "
    "or losing payoff: half of the total pot. Whole match rule: you play "
    "100 games starting from 100 chips and aim to end with more chips than "
    "you started with."
)

OBSERVATION_RULES_TEXT = (
    "The observation is a dictionary. 'hand' is your private card and "
    "'public_card' is the community card (None before the reveal); cards "
    "are written as suit letter then rank letter, so SJ denotes the J of "
    "Spades and HK denotes King of Hearts. 'all_chips' lists the chips in "
    "the pot as [opponent's chips, your chips] and 'my_chips' is your own "
    "contribution. 'valid_action_list' (also named 'legal_actions') "
    "represents the actions agent can take, for example "
    "{'valid_action_list' : ['raise','fold','call']} means that agent can "
    "choose raise, fold or call."
)

TEMPLATE_FILES = {
    "interpret": "interpret.txt",
    "pattern_env": "pattern_env.txt",
    "pattern_self": "pattern_self.txt",
    "belief_env": "belief_env.txt",
    "belief_self": "belief_self.txt",
    "plan": "plan.txt",
    # Reflection instructions are part of the self-pattern template.
    "reflect": "pattern_self.txt",
}


class TemplateError(KeyError):
    """A template placeholder was left unfilled."""


@lru_cache(maxsize=None)
def template_text(kind: str) -> str:
    filename = TEMPLATE_FILES[kind]
    return resources.files("leduclab.reasoners.assets").joinpath(filename).read_text()


@lru_cache(maxsize=None)
def placeholders(kind: str) -> tuple[str, ...]:
    names = []
    for _, name, _, _ in string.Formatter().parse(template_text(kind)):
        if name and name not in names:
            names.append(name)
    return tuple(names)


def render(kind: str, variables: dict) -> str:
    """Fill a template; every placeholder the template names must be given."""
    text = template_text(kind)
    needed = placeholders(kind)
    missing = [name for name in needed if name not in variables]
    if missing:
        raise TemplateError(f"{kind} template missing variables: {missing}")
    return text.format(**{name: variables[name] for name in needed})


def interpret_text(obs, total_pot: int | None = None) -> str:
    """Deterministic readable rendering of an observation."""
    pot = total_pot if total_pot is not None else sum(obs.all_chips)
    public = (
        f"the public card is {card_name(obs.public_card)}"
        if obs.public_card
        else "no public card yet"
    )
    return (
        f"You hold {card_name(obs.hand)}; {public}; "
        f"you contributed {obs.my_chips} of {pot} chips; "
        f"legal: {', '.join(obs.legal_actions)}."
    )
