"""Loading text encoders and reading their geometry off the checkpoint config."""

from __future__ import annotations

from dataclasses import dataclass

ENCODER_KINDS = ("clip-text", "flava-text", "masked-lm", "sentence-encoder")

# tokenizers report this sentinel when the checkpoint sets no length limit
_UNBOUNDED = 1_000_000


class FetchError(RuntimeError):
    """The checkpoint could not be resolved or loaded."""


@dataclass(frozen=True)
class ModelSpec:
    hub_id: str
    encoder_kind: str
    layer_count: int
    hidden_dim: int
    max_positions: int


def load_encoder(hub_id: str, kind: str, device: str = "cpu"):
    """Load tokenizer + text encoder; returns (tokenizer, model, ModelSpec).

    ``kind`` picks the model head: the text tower for CLIP and FLAVA
    checkpoints, the plain encoder otherwise (sentence encoders are ordinary
    masked-LM-style checkpoints as far as hidden states are concerned).
    """
    from transformers import AutoModel, AutoTokenizer, CLIPTextModel, FlavaTextModel

    if kind not in ENCODER_KINDS:
        raise ValueError(f"unknown encoder kind {kind!r}; expected one of {ENCODER_KINDS}")
    model_cls = {"clip-text": CLIPTextModel, "flava-text": FlavaTextModel}.get(kind, AutoModel)
    try:
        tokenizer = AutoTokenizer.from_pretrained(hub_id, use_fast=True)
        model = model_cls.from_pretrained(hub_id)
    except (OSError, ValueError, EnvironmentError) as err:
        raise FetchError(f"cannot load checkpoint {hub_id!r}: {err}") from err
    if not getattr(tokenizer, "is_fast", False):
        raise FetchError(
            f"checkpoint {hub_id!r} has no fast tokenizer; word alignment needs one"
        )
    model.eval()
    model.to(device)
    config = model.config
    max_positions = int(config.max_position_embeddings)
    declared = getattr(tokenizer, "model_max_length", None)
    if declared and declared < _UNBOUNDED:
        max_positions = min(max_positions, int(declared))
    spec = ModelSpec(
        hub_id=hub_id,
        encoder_kind=kind,
        layer_count=int(config.num_hidden_layers),
        hidden_dim=int(config.hidden_size),
        max_positions=max_positions,
    )
    return tokenizer, model, spec
