"""Thread-safe in-process topic bus.

Topics are registered once with a message kind; publishing fans the
payload out synchronously to every subscriber registered at that moment.
Subscriber callbacks run on the publishing thread and must be quick and
exception-free; a callback that raises is detached and the error is kept
for inspection rather than propagated into the publisher.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional


class UnknownTopic(KeyError):
    """Publish or subscribe referenced an unregistered topic."""


@dataclass(frozen=True)
class TopicInfo:
    """Listing entry for one topic.

    publish_count and last_publish_sim_time describe the most recent
    activity; publisher_count is the number of registered publishers.
    """

    name: str
    message_kind: str
    publisher_count: int
    publish_count: int
    last_publish_sim_time: Optional[float]


class _Topic:
    __slots__ = ("name", "message_kind", "publisher_count", "publish_count",
                 "last_publish_sim_time", "subscribers")

    def __init__(self, name: str, message_kind: str, publisher_count: int):
        self.name = name
        self.message_kind = message_kind
        self.publisher_count = publisher_count
        self.publish_count = 0
        self.last_publish_sim_time: Optional[float] = None
        self.subscribers: Dict[int, Callable[[Any], None]] = {}


class Subscription:
    """Handle returned by subscribe; pass back to unsubscribe."""

    __slots__ = ("topic", "key")

    def __init__(self, topic: str, key: int):
        self.topic = topic
        self.key = key


class MessageBus:
    def __init__(self, clock: Optional[Callable[[], float]] = None):
        """Args:
        clock: returns the current sim time, stamped on publishes.
        """
        self._clock = clock
        self._lock = threading.Lock()
        self._topics: Dict[str, _Topic] = {}
        self._next_key = 0
        self.dropped_callbacks: List[str] = []

    def register_topic(self, name: str, message_kind: str, publisher_count: int = 1) -> None:
        with self._lock:
            if name in self._topics:
                raise ValueError(f"topic {name!r} already registered")
            self._topics[name] = _Topic(name, message_kind, publisher_count)

    def has_topic(self, name: str) -> bool:
        with self._lock:
            return name in self._topics

    def subscribe(self, name: str, fn: Callable[[Any], None]) -> Subscription:
        with self._lock:
            topic = self._topics.get(name)
            if topic is None:
                raise UnknownTopic(f"unknown topic {name!r}")
            key = self._next_key
            self._next_key += 1
            topic.subscribers[key] = fn
        return Subscription(name, key)

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            topic = self._topics.get(sub.topic)
            if topic is not None:
                topic.subscribers.pop(sub.key, None)

    def publish(self, name: str, payload: Any) -> None:
        with self._lock:
            topic = self._topics.get(name)
            if topic is None:
                raise UnknownTopic(f"unknown topic {name!r}")
            topic.publish_count += 1
            topic.last_publish_sim_time = self._clock() if self._clock else None
            targets = list(topic.subscribers.items())
        for key, fn in targets:
            try:
                fn(payload)
            except Exception as e:  # detach the offender, keep publishing
                self.dropped_callbacks.append(f"{name}: {e}")
                with self._lock:
                    t = self._topics.get(name)
                    if t is not None:
                        t.subscribers.pop(key, None)

    def topics(self) -> List[TopicInfo]:
        with self._lock:
            return [
                TopicInfo(
                    name=t.name,
                    message_kind=t.message_kind,
                    publisher_count=t.publisher_count,
                    publish_count=t.publish_count,
                    last_publish_sim_time=t.last_publish_sim_time,
                )
                for t in sorted(self._topics.values(), key=lambda t: t.name)
            ]
