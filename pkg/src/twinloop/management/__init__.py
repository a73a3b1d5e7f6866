from .embedding import cosine_similarity, keyword_embedding, term_vector
from .library import IntentEmbedding, MatchResult, PolicyEmbedding, PolicyLibrary, match_policy
from .encoder import (
    EncoderParams,
    FeedbackOutcome,
    SemanticEncoder,
    encode_intent,
    intent_features,
    train_encoder,
)

__all__ = [
    "cosine_similarity",
    "keyword_embedding",
    "term_vector",
    "IntentEmbedding",
    "MatchResult",
    "PolicyEmbedding",
    "PolicyLibrary",
    "match_policy",
    "EncoderParams",
    "FeedbackOutcome",
    "SemanticEncoder",
    "encode_intent",
    "intent_features",
    "train_encoder",
]
