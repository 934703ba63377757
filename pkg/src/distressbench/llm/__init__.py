"""Prompting protocol: serialization, templates, client, parsing and profiling."""

from .client import ClientConfig, LLMExchange, query_endpoint, query_endpoint_async, read_exchanges, write_exchanges
from .mock import MockState, create_mock_app, mock_reply
from .parse import ParseResult, parse_response
from .profile import ProbabilityProfile, analyze_probability_profile
from .prompt import (
    ICLExample,
    ICLExampleSet,
    PromptTemplate,
    render_prompt,
    select_hard_examples,
    select_icl_examples,
)
from .serialize import COMPANY_INFO, FEATURE_GROUPS, prompt_feature_frame, serialize_company, serialize_frame

__all__ = [
    "COMPANY_INFO",
    "FEATURE_GROUPS",
    "ClientConfig",
    "ICLExample",
    "ICLExampleSet",
    "LLMExchange",
    "MockState",
    "ParseResult",
    "ProbabilityProfile",
    "PromptTemplate",
    "analyze_probability_profile",
    "create_mock_app",
    "mock_reply",
    "parse_response",
    "prompt_feature_frame",
    "query_endpoint",
    "query_endpoint_async",
    "read_exchanges",
    "render_prompt",
    "select_hard_examples",
    "select_icl_examples",
    "serialize_company",
    "serialize_frame",
    "write_exchanges",
]
