"""OpenTelemetry tracing setup."""

import os

from opentelemetry import trace
from opentelemetry.sdk.resources import SERVICE_INSTANCE_ID, SERVICE_NAME, Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor
from opentelemetry.trace import NoOpTracerProvider

from .config import get_settings


def setup_tracing(service_name: str) -> None:
    settings = get_settings()

    # If tracing is disabled via config, use the NoOp provider.
    if not settings.tracing.enabled:
        trace.set_tracer_provider(NoOpTracerProvider())
        return

    resource = Resource.create(
        attributes={
            SERVICE_NAME: service_name,
            SERVICE_INSTANCE_ID: f"pid-{os.getpid()}",
        }
    )
    tracer_provider = TracerProvider(resource=resource)
    # Simple (synchronous) processor: CLI runs are short and must not drop spans on exit.
    tracer_provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
    trace.set_tracer_provider(tracer_provider)


def get_tracer(name: str):
    """Get a tracer instance."""
    settings = get_settings()

    if not settings.tracing.enabled:
        # Return OpenTelemetry's built-in no-op tracer if disabled.
        return trace.NoOpTracer()

    return trace.get_tracer(name)
