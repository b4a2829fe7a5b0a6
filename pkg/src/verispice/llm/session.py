"""Append-only multi-turn chat session."""

from __future__ import annotations

import base64
from typing import Sequence

from ..errors import InputError
from .provider import Message


class ChatSession:
    """One conversation with one provider at one temperature.

    History is append-only and every request carries the full prior history,
    so the provider sees the whole dialogue on each turn.
    """

    def __init__(self, provider, temperature: float = 0.0):
        if temperature < 0:
            raise InputError(f"temperature must be >= 0, got {temperature}")
        self.provider = provider
        self.temperature = temperature
        self._history: list[Message] = []

    @property
    def history(self) -> tuple[Message, ...]:
        return tuple(self._history)

    def __len__(self) -> int:
        return len(self._history)

    def ask(self, text: str, images: Sequence[bytes] = ()) -> str:
        """Send one user turn, record the assistant's reply, return it."""
        self._history.append(Message("user", text, tuple(images)))
        reply = self.provider.complete(tuple(self._history), self.temperature)
        self._history.append(Message("assistant", reply))
        return reply

    def to_dict(self) -> dict:
        """Serializable transcript; images are base64 so it survives JSON."""
        return {
            "temperature": self.temperature,
            "history": [
                {
                    "role": m.role,
                    "text": m.text,
                    "images": [base64.b64encode(img).decode("ascii") for img in m.images],
                }
                for m in self._history
            ],
        }

    @classmethod
    def restore(cls, provider, data: dict) -> "ChatSession":
        """Rebuild a session around the given provider from to_dict output."""
        session = cls(provider, temperature=data.get("temperature", 0.0))
        for m in data.get("history", []):
            images = tuple(base64.b64decode(i) for i in m.get("images", []))
            session._history.append(Message(m["role"], m["text"], images))
        return session
