"""Prompt templates for the caption-summarization pipeline.

Templates are data, not code: a UTF-8 file with {q0}, {captions}, and
{examples} placeholders. The shipped default carries two few-shot examples
reconstructed for this engine; swap in your own file to change the prompt.
"""
from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

PLACEHOLDERS = ("{q0}", "{captions}", "{examples}")


@dataclass(frozen=True)
class PromptTemplate:
    text: str
    examples: str

    def __post_init__(self) -> None:
        for placeholder in PLACEHOLDERS:
            if placeholder not in self.text:
                raise ValueError(f"template is missing the {placeholder} placeholder")

    def render(self, q0: str, captions: Sequence[str]) -> str:
        if not captions:
            raise ValueError("cannot render a prompt with zero captions")
        caption_block = "\n".join(f"- {c}" for c in captions)
        return (
            self.text.replace("{examples}", self.examples)
            .replace("{q0}", q0)
            .replace("{captions}", caption_block)
        )


def _read_data(name: str) -> str:
    return (
        importlib.resources.files("croqs.data").joinpath(name).read_text(encoding="utf-8")
    )


def default_template() -> PromptTemplate:
    return PromptTemplate(
        text=_read_data("groupcap_prompt.txt"),
        examples=_read_data("groupcap_examples.txt"),
    )


def load_template(path: str | Path, examples_path: str | Path | None = None) -> PromptTemplate:
    """Template from a file; examples come along or fall back to the default set."""
    examples = (
        Path(examples_path).read_text(encoding="utf-8")
        if examples_path is not None
        else _read_data("groupcap_examples.txt")
    )
    return PromptTemplate(text=Path(path).read_text(encoding="utf-8"), examples=examples)
