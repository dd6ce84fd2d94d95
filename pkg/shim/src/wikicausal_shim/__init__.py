"""HTTP inference service speaking the toolkit's wire protocol.

Serves a generative instruction-tuned model for yes/no edge judging and an
extractive QA model for question-driven extraction, or a deterministic mock
scripted from a fixture file. Endpoints: POST /v1/generate, POST /v1/qa,
GET /v1/health.
"""

__version__ = "0.1.0"
