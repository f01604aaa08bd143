"""Prompt template registry backed by prompts.toml."""

import logging
import string
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

from ..errors import ConfigError, PromptRenderError
from ..tools.image import TableImage
from .request import Sampling, VisionRequest

logger = logging.getLogger(__name__)

DEFAULT_PROMPTS = Path(__file__).with_name("prompts.toml")


class TemplateId(str, Enum):
    RECOGNIZE_SIMPLE = "RecognizeSimple"
    RECOGNIZE_COT = "RecognizeCoT"
    VTSD = "VTSD"
    MCD = "MCD"
    CCR = "CCR"
    ICR = "ICR"
    IRDR = "IRDR"
    ICDR = "ICDR"
    PLAN_GENERATION = "PlanGeneration"
    REFLECTION = "Reflection"


def _placeholders(text: str) -> Tuple[str, ...]:
    names = []
    for _, field_name, _, _ in string.Formatter().parse(text):
        if field_name and field_name not in names:
            names.append(field_name)
    return tuple(names)


@dataclass(frozen=True)
class PromptTemplate:
    template_id: TemplateId
    system: str
    user: str

    @property
    def placeholders(self) -> Tuple[str, ...]:
        return _placeholders(self.system) + tuple(
            name for name in _placeholders(self.user) if name not in _placeholders(self.system)
        )

    def render(self, bindings: Mapping[str, Any]) -> Tuple[str, str]:
        """
        Fill every placeholder.

        Raises:
            PromptRenderError: a placeholder has no binding
        """
        missing = [name for name in self.placeholders if name not in bindings]
        if missing:
            raise PromptRenderError(f"{self.template_id.value}: unbound placeholder(s) {', '.join(missing)}")
        try:
            return self.system.format_map(bindings), self.user.format_map(bindings)
        except (KeyError, IndexError, ValueError) as e:
            raise PromptRenderError(f"{self.template_id.value}: {e}") from e


class PromptRegistry:
    """Loaded templates keyed by TemplateId."""

    def __init__(self, templates: Dict[TemplateId, PromptTemplate]):
        missing = [t.value for t in TemplateId if t not in templates]
        if missing:
            raise ConfigError(f"prompt file lacks template(s): {', '.join(missing)}")
        self.templates = templates

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "PromptRegistry":
        path = Path(path or DEFAULT_PROMPTS)
        with path.open("rb") as fh:
            data = tomllib.load(fh)
        templates = {}
        for key, body in data.items():
            try:
                template_id = TemplateId(key)
            except ValueError:
                logger.warning("ignoring unknown prompt template %r in %s", key, path.name)
                continue
            templates[template_id] = PromptTemplate(template_id, body.get("system", ""), body["user"])
        return cls(templates)

    def get(self, template_id) -> PromptTemplate:
        return self.templates[TemplateId(template_id)]

    def request(
        self,
        template_id,
        images: Iterable[TableImage],
        bindings: Optional[Mapping[str, Any]] = None,
        sampling: Sampling = Sampling(),
    ) -> VisionRequest:
        """Render a template into a VisionRequest."""
        template = self.get(template_id)
        bindings = dict(bindings or {})
        system, user = template.render(bindings)
        return VisionRequest(
            template_id=template.template_id.value,
            system_text=system,
            user_text=user,
            images=tuple(images),
            bindings=bindings,
            sampling=sampling,
        )


_default_registry: Optional[PromptRegistry] = None


def default_registry() -> PromptRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = PromptRegistry.load()
    return _default_registry
