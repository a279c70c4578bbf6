"""
Configuration schema and validation for NDSQ.
Defines the structure and validation rules for model, training, sampling and
experiment settings.
"""

from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from core.types import MemoryKind, ModelKind, Precision, TaskKind

LEARNING_RATE_GRID = (5e-3, 1e-3, 5e-4, 1e-4, 5e-5)


class ModelConfig(BaseModel):
    """Architecture and widths of a transduction model."""
    kind: ModelKind = Field(default=ModelKind.STACK_LSTM, description="Controller architecture")
    hidden: int = Field(default=256, ge=1, le=8192, description="LSTM hidden width")
    memory_width: int = Field(default=256, ge=1, le=8192, description="Memory value width m")
    embedding: int = Field(default=64, ge=1, le=4096, description="Input symbol embedding width")
    source_vocab: int = Field(default=128, ge=1, description="Number of source symbols")
    target_vocab: int = Field(default=128, ge=1, description="Number of target symbols")
    precision: Precision = Field(default=Precision.FLOAT64, description="Floating point mode")
    init_scale: float = Field(default=0.08, gt=0.0, le=1.0, description="Uniform init half-width")

    model_config = {"extra": "forbid", "frozen": True}

    @field_validator('kind', mode='before')
    @classmethod
    def parse_kind(cls, v):
        if isinstance(v, ModelKind):
            return v
        return ModelKind.parse(v)

    @property
    def memory_kind(self) -> Optional[MemoryKind]:
        return self.kind.memory_kind

    @property
    def layers(self) -> int:
        return self.kind.layers

    @property
    def dtype(self):
        return self.precision.dtype

    @property
    def read_count(self) -> int:
        """Read vectors fed back into the controller input."""
        if self.memory_kind is None:
            return 0
        return 2 if self.memory_kind is MemoryKind.DEQUE else 1

    @property
    def input_rows(self) -> int:
        """Rows of the input embedding: reserved symbols, source, target."""
        return 3 + self.source_vocab + self.target_vocab

    @property
    def output_classes(self) -> int:
        """Softmax classes: EOS plus every target symbol."""
        return self.target_vocab + 1


class SampleConfig(BaseModel):
    """Length range and vocabulary for a task generator."""
    min_len: int = Field(default=8, ge=1, description="Shortest source length")
    max_len: int = Field(default=64, ge=1, description="Longest source length")
    vocab_size: int = Field(default=128, ge=1, description="Synthetic vocabulary size")
    task: TaskKind = Field(default=TaskKind.COPY, description="Task the lengths apply to")

    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode='after')
    def check_range(self):
        if self.min_len > self.max_len:
            raise ValueError(f"min_len {self.min_len} exceeds max_len {self.max_len}")
        if self.task is TaskKind.BIGRAM_FLIP and (self.min_len % 2 or self.max_len % 2):
            raise ValueError(
                f"bigram-flip needs even lengths, got min_len={self.min_len} max_len={self.max_len}")
        return self

    @property
    def length_range(self) -> Tuple[int, int]:
        return self.min_len, self.max_len


class TrainConfig(BaseModel):
    """Optimizer and training-loop settings."""
    learning_rate: float = Field(default=1e-3, ge=0.0, le=1.0, description="RMSProp learning rate")
    batch_size: int = Field(default=10, ge=1, le=10000, description="Examples per update")
    clip: float = Field(default=1.0, gt=0.0, description="Elementwise gradient clip threshold")
    rmsprop_decay: float = Field(default=0.95, ge=0.0, lt=1.0, description="Squared-gradient decay")
    rmsprop_eps: float = Field(default=1e-8, gt=0.0, description="RMSProp denominator epsilon")
    ppl_every: int = Field(default=100, ge=1, description="Batches between perplexity records")
    acc_every: int = Field(default=1000, ge=1, description="Batches between accuracy evaluations")
    max_batches: int = Field(default=10000, ge=1, description="Total batches to train")
    eval_samples: int = Field(default=1000, ge=1, description="Examples per accuracy evaluation")
    seed: int = Field(default=0, ge=0, description="Seed for initialization and data")

    model_config = {"extra": "forbid", "frozen": True}


class ExperimentConfig(BaseModel):
    """Flat configuration accepted by the command line and config files."""
    task: TaskKind = Field(default=TaskKind.COPY, description="Transduction task")
    model: ModelKind = Field(default=ModelKind.STACK_LSTM, description="Model architecture")
    hidden: int = Field(default=256, ge=1, le=8192, description="LSTM hidden width")
    memory_width: int = Field(default=256, ge=1, le=8192, description="Memory value width")
    embedding: int = Field(default=64, ge=1, le=4096, description="Input embedding width")
    vocab_size: int = Field(default=128, ge=1, description="Synthetic task vocabulary size")
    min_len: int = Field(default=8, ge=1, description="Shortest training source")
    max_len: int = Field(default=64, ge=1, description="Longest training source")
    test_min_len: int = Field(default=65, ge=1, description="Shortest test source")
    test_max_len: int = Field(default=128, ge=1, description="Longest test source")
    learning_rate: float = Field(default=1e-3, ge=0.0, le=1.0, description="RMSProp learning rate")
    batch_size: int = Field(default=10, ge=1, description="Examples per update")
    clip: float = Field(default=1.0, gt=0.0, description="Gradient clip threshold")
    rmsprop_decay: float = Field(default=0.95, ge=0.0, lt=1.0, description="RMSProp decay")
    rmsprop_eps: float = Field(default=1e-8, gt=0.0, description="RMSProp epsilon")
    ppl_every: int = Field(default=100, ge=1, description="Batches between perplexity records")
    acc_every: int = Field(default=1000, ge=1, description="Batches between accuracy evaluations")
    max_batches: int = Field(default=10000, ge=1, description="Total training batches")
    eval_samples: int = Field(default=1000, ge=1, description="Examples per evaluation")
    seed: int = Field(default=0, ge=0, description="Master seed")
    output_dir: str = Field(default="runs", description="Directory for all run outputs")
    precision: Precision = Field(default=Precision.FLOAT64, description="Floating point mode")
    grid: bool = Field(default=False, description="Run the learning-rate grid")
    grammar_file: Optional[str] = Field(default=None, description="Grammar file for task 'grammar'")
    max_attempts: int = Field(default=10000, ge=1, description="Rejection-sampling budget")
    log_level: str = Field(default="INFO", description="Logging level")

    model_config = {
        "validate_assignment": True,
        "extra": "forbid"
    }

    @field_validator('model', mode='before')
    @classmethod
    def parse_model(cls, v):
        if isinstance(v, ModelKind):
            return v
        return ModelKind.parse(v)

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v):
        level = str(v).upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{v}'")
        return level

    @model_validator(mode='before')
    @classmethod
    def even_test_range_default(cls, data: Any):
        """Bigram-flip test lengths default to the first even length above training."""
        if not isinstance(data, dict):
            return data
        task = data.get("task", "")
        task = task.value if isinstance(task, TaskKind) else str(task).lower()
        if task == TaskKind.BIGRAM_FLIP.value:
            if "test_min_len" not in data:
                data = dict(data)
                data["test_min_len"] = 66
        return data

    @model_validator(mode='after')
    def check_consistency(self):
        if self.min_len > self.max_len:
            raise ValueError(f"min_len {self.min_len} exceeds max_len {self.max_len}")
        if self.test_min_len > self.test_max_len:
            raise ValueError(
                f"test_min_len {self.test_min_len} exceeds test_max_len {self.test_max_len}")
        if self.task is TaskKind.BIGRAM_FLIP:
            odd = [name for name in ("min_len", "max_len", "test_min_len", "test_max_len")
                   if getattr(self, name) % 2]
            if odd:
                raise ValueError(f"bigram-flip needs even lengths; odd: {', '.join(odd)}")
        if self.task is TaskKind.CUSTOM_GRAMMAR and not self.grammar_file:
            raise ValueError("task 'grammar' needs grammar_file")
        return self

    def train_config(self) -> TrainConfig:
        return TrainConfig(**{name: getattr(self, name) for name in TrainConfig.model_fields})

    def sample_config(self, split: str = "train") -> SampleConfig:
        if split == "train":
            lo, hi = self.min_len, self.max_len
        else:
            lo, hi = self.test_min_len, self.test_max_len
        return SampleConfig(min_len=lo, max_len=hi, vocab_size=self.vocab_size, task=self.task)

    def build_model_config(self, source_vocab: int, target_vocab: int) -> ModelConfig:
        return ModelConfig(
            kind=self.model, hidden=self.hidden, memory_width=self.memory_width,
            embedding=self.embedding, source_vocab=source_vocab, target_vocab=target_vocab,
            precision=self.precision,
        )


def create_default_config() -> ExperimentConfig:
    """Create a default configuration with the published settings."""
    return ExperimentConfig()


def validate_config_file(config_data: Dict[str, Any]) -> ExperimentConfig:
    """Validate and create an ExperimentConfig from dictionary data."""
    return ExperimentConfig(**config_data)


def get_config_schema() -> dict:
    """Get the configuration schema for documentation."""
    return ExperimentConfig.model_json_schema()
