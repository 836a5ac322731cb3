from .templates import (
    SCHEMAS,
    TEMPLATES,
    PromptTemplate,
    TemplateId,
    render_template,
)
from .providers import (
    HttpLlmProvider,
    LlmProvider,
    MockLlmProvider,
    ProviderCall,
    ScriptedLlmProvider,
    completion_payload,
)
from .gateway import LlmGateway, LlmRequest, StructuredReply

__all__ = [
    "TemplateId",
    "PromptTemplate",
    "TEMPLATES",
    "SCHEMAS",
    "render_template",
    "LlmProvider",
    "HttpLlmProvider",
    "MockLlmProvider",
    "ProviderCall",
    "ScriptedLlmProvider",
    "completion_payload",
    "LlmGateway",
    "LlmRequest",
    "StructuredReply",
]
