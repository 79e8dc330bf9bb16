"""Appending events to the log."""

from mb_hybrid4x.engine.models import EVENT_FIELDS, Event, EventKind, EventValue, GameState


def log_event(state: GameState, kind: EventKind, player: int | None, **payload: EventValue) -> Event:
    """Append an event stamped with the current turn and the next log index.

    Payload keywords are reordered to the kind's field order; missing fields raise KeyError.
    """
    event = Event(
        index=len(state.event_log),
        turn=state.turn,
        kind=kind,
        player=player,
        payload={name: payload[name] for name in EVENT_FIELDS[kind]},
    )
    state.event_log.append(event)
    return event
