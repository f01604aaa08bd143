"""Recognition agent: table image to markup through the vision model."""

import logging
from dataclasses import dataclass
from typing import Optional

from ..config import PipelineConfig
from ..errors import NoTableError
from ..gateway.client import GatewaySession
from ..gateway.parsers import parse_markup_response
from ..gateway.prompts import PromptRegistry, TemplateId, default_registry
from ..gateway.request import Sampling
from ..tools.image import TableImage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecognitionResult:
    markup: str
    error: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.error is None


class RecognizerAgent:
    """Agent that asks the model for the table markup of one image."""

    def __init__(self, config: PipelineConfig = PipelineConfig(), registry: Optional[PromptRegistry] = None):
        self.name = "RecognizerAgent"
        self.config = config
        self.registry = registry or default_registry()

    @property
    def template(self) -> TemplateId:
        return TemplateId.RECOGNIZE_COT if self.config.chain_of_thought else TemplateId.RECOGNIZE_SIMPLE

    def recognize(self, image: TableImage, session: GatewaySession) -> RecognitionResult:
        """
        Recognize the table in an image.

        Args:
            image: Table image
            session: Gateway session of the current sample

        Returns:
            RecognitionResult; a response without a table yields empty markup
            and a NoTableError note, other gateway errors propagate
        """
        request = self.registry.request(
            self.template,
            images=[image],
            sampling=Sampling(temperature=self.config.recognition_temperature, top_p=self.config.top_p),
        )
        raw = session.complete(request)
        try:
            return RecognitionResult(parse_markup_response(raw))
        except NoTableError as e:
            logger.info("no table recognized in %s: %s", image.id, e)
            return RecognitionResult("", "NoTableError")
