"""Exception types raised across the simulator."""


class AgentPowerError(Exception):
    pass


class InvalidScenario(AgentPowerError, ValueError):
    pass


class DimensionError(AgentPowerError, ValueError):
    pass


class DegenerateLink(AgentPowerError, ValueError):
    """A direct-link gain is zero, so the target SINR cannot be inverted."""


class ProtocolViolation(AgentPowerError):
    pass


class FilterExhausted(AgentPowerError):
    """Too many draws were rejected while collecting divergent scenarios."""


class GatewayError(AgentPowerError):
    pass


class GatewayTimeout(GatewayError):
    pass


class GatewayConnectionError(GatewayError):
    pass


class HttpStatusError(GatewayError):
    def __init__(self, code: int, body: str = ""):
        super().__init__(f"HTTP {code}: {body[:200]}")
        self.code = code
        self.body = body


class MalformedResponse(GatewayError):
    pass
