"""Prompt templates for the five agent roles.

Defaults are embedded below and can be overridden by a directory of plain
text files named keywords.txt, gag.txt, feedback.txt, regeneration.txt and
arbitrator.txt. Placeholders use single-brace {name} markers; rendering
fails loudly on any unbound placeholder.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import TemplateError, UnboundPlaceholder

TEMPLATE_NAMES = ("keywords", "gag", "feedback", "regeneration", "arbitrator")

_PLACEHOLDER = re.compile(r"\{([a-z][a-z0-9_]*)\}")

_KEYWORDS_BODY = """\
You are an English speaking eCommerce catalog specialist. You are an expert in generating keywords for a given product.

Consider the following product:
{prod_info}

Output at most 5 short keywords relevant to the product.

Please just output the keywords and separate them with commas.
Do not add any other text.
"""

_GAG_BODY = """\
You are an eCommerce specialist. Your expertise is in generating a title for a group of items presented in an eCommerce module.
Your task is to name this eCommerce module.

The list of products and their associated keywords are:
{prod_info_and_keys}

Generate a module title for the list of items to explain them, aiming to increase customer engagement and improve eCommerce module transparency.

Restrict the response to the following format strictly:

"title: A maximum of 10 word title that is relevant to the list of items."
"""

_FEEDBACK_BODY = """\
You are an evaluator that evaluates the generated titles for a group of items.

Here is the generated title:
{title}
Here is the set of items and their associated keywords that the title is generated for them:
{prod_info_and_keys}

Determine if the title is relevant enough to some or all of the items and can increase customer engagement or improve ecommerece module transparency.
If so, provide concise feedback pointing to at least one such uncovered item that the generator could improve on.

Keep the feedback within 30 words.
"""

_REGENERATION_BODY = """\
You are an eCommerce title generation specialist working in a refinement circle. Your task is to improve a previously generated title based on feedback from an evaluator.

The list of items and their associated keywords are:
{prod_info_and_keys}

The original title was:
{title}

The evaluator provided the following feedback:
{feedback}

Generate a refined title that
(1) addresses at least one uncovered or weakly covered item indicated in the feedback
(2) preserves all existing item coverage in the original title.
(3) Ensure the revised title is no more than 10 words and formatted exactly as follows:
title: <your refined title>
"""

_ARBITRATOR_BODY = """\
You are an eCommerece specialist tasked with selecting the best title for an eCommerce module after refinement.
You are given two titles:

1. The original title: {title}
2. The refined title: {title_2}

These titles are generated based on the following list of products and their associated keywords:
{prod_info_and_keys}

Select the title that is more relevant and likely to increase customer engagement and improve module transparency.
Output only the selected title.
"""


@dataclass(frozen=True)
class PromptTemplate:
    """A named prompt body with {placeholder} markers."""

    name: str
    body: str

    def placeholders(self) -> tuple[str, ...]:
        seen: list[str] = []
        for match in _PLACEHOLDER.finditer(self.body):
            if match.group(1) not in seen:
                seen.append(match.group(1))
        return tuple(seen)

    def render(self, **bindings: str) -> str:
        """Substitute every placeholder; unbound names raise."""
        missing = [name for name in self.placeholders() if name not in bindings]
        if missing:
            raise UnboundPlaceholder(
                f"template {self.name!r} has unbound placeholders: {', '.join(missing)}"
            )
        return _PLACEHOLDER.sub(lambda m: str(bindings[m.group(1)]), self.body)


@dataclass(frozen=True)
class TemplateSet:
    """The five role templates used by one run."""

    keywords: PromptTemplate
    gag: PromptTemplate
    feedback: PromptTemplate
    regeneration: PromptTemplate
    arbitrator: PromptTemplate

    def get(self, name: str) -> PromptTemplate:
        if name not in TEMPLATE_NAMES:
            raise TemplateError(f"unknown template name {name!r}")
        return getattr(self, name)


DEFAULT_TEMPLATES = TemplateSet(
    keywords=PromptTemplate("keywords", _KEYWORDS_BODY),
    gag=PromptTemplate("gag", _GAG_BODY),
    feedback=PromptTemplate("feedback", _FEEDBACK_BODY),
    regeneration=PromptTemplate("regeneration", _REGENERATION_BODY),
    arbitrator=PromptTemplate("arbitrator", _ARBITRATOR_BODY),
)


def load_templates(directory: str | Path) -> TemplateSet:
    """Load role templates from ``directory``; missing files keep defaults."""
    directory = Path(directory)
    if not directory.is_dir():
        raise TemplateError(f"template directory {str(directory)!r} does not exist")
    loaded: dict[str, PromptTemplate] = {}
    for name in TEMPLATE_NAMES:
        path = directory / f"{name}.txt"
        if path.is_file():
            loaded[name] = PromptTemplate(name, path.read_text(encoding="utf-8"))
        else:
            loaded[name] = DEFAULT_TEMPLATES.get(name)
    return TemplateSet(**loaded)
