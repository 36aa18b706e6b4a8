"""Host-side denoiser transport: framing, validation, endpoints."""

import io
import struct
import sys
import textwrap

import numpy as np
import pytest

from scivid import (PluginClient, PluginEndpoint, PluginError,
                    PluginTimeoutError, ProtocolViolationError,
                    plugin_denoise)
from scivid.plugin import (MSG_REQUEST, MSG_RESPONSE, encode_error,
                           encode_request, encode_response, echo_respond)


@pytest.fixture
def cube():
    return np.random.default_rng(0).random((3, 5, 4)).astype(np.float32)


def stream_endpoint(response_bytes):
    """Endpoint whose 'plugin' is a canned byte buffer."""
    return PluginEndpoint(streams=(io.BytesIO(), io.BytesIO(response_bytes)),
                          timeout=1.0)


class TestFraming:
    def test_request_layout(self, cube):
        blob = encode_request(cube, 0.25)
        assert blob[:4] == b"VDN1"
        assert blob[4] == MSG_REQUEST
        assert blob[5] == 1
        b, h, w, sigma = struct.unpack("<IIIf", blob[8:24])
        assert (b, h, w) == cube.shape
        assert sigma == pytest.approx(0.25)
        assert blob[24:] == cube.tobytes()

    def test_echo_responder_round_trip(self, cube):
        resp = echo_respond(encode_request(cube, 0.1))
        assert resp[4] == MSG_RESPONSE
        payload = np.frombuffer(resp[24:], dtype="<f4").reshape(cube.shape)
        assert np.array_equal(payload, cube)

    def test_echo_responder_rejects_garbage(self):
        resp = echo_respond(b"JUNK" + bytes(20))
        assert resp[4] == 3  # error message


class TestLoopbackEndpoint:
    def test_identity(self, cube):
        out = plugin_denoise(cube, 0.2, PluginEndpoint(loopback=True))
        assert np.array_equal(out, cube)
        assert out.dtype == cube.dtype

    def test_float64_dtype_preserved(self):
        cube64 = np.random.default_rng(1).random((2, 4, 4))
        out = plugin_denoise(cube64, 0.2, PluginEndpoint(loopback=True))
        assert out.dtype == np.float64
        assert np.allclose(out, cube64, atol=1e-7)

    def test_session_reuse(self, cube):
        with PluginClient(PluginEndpoint(loopback=True)) as client:
            for _ in range(3):
                assert np.array_equal(client.denoise(cube, 0.1), cube)


class TestMalformedResponses:
    """Five canned malformed responses must all raise typed errors."""

    def test_bad_magic(self, cube):
        resp = bytearray(echo_respond(encode_request(cube, 0.1)))
        resp[:4] = b"NOPE"
        with pytest.raises(ProtocolViolationError, match="magic"):
            plugin_denoise(cube, 0.1, stream_endpoint(bytes(resp)))

    def test_bad_version(self, cube):
        resp = bytearray(echo_respond(encode_request(cube, 0.1)))
        resp[5] = 7
        with pytest.raises(ProtocolViolationError, match="version"):
            plugin_denoise(cube, 0.1, stream_endpoint(bytes(resp)))

    def test_unexpected_message_type(self, cube):
        resp = bytearray(echo_respond(encode_request(cube, 0.1)))
        resp[4] = MSG_REQUEST
        with pytest.raises(ProtocolViolationError, match="type"):
            plugin_denoise(cube, 0.1, stream_endpoint(bytes(resp)))

    def test_wrong_dims(self, cube):
        other = np.zeros((2, 5, 4), dtype=np.float32)
        resp = encode_response(other, 0.1)
        with pytest.raises(ProtocolViolationError, match="dims"):
            plugin_denoise(cube, 0.1, stream_endpoint(resp))

    def test_truncated_payload(self, cube):
        resp = echo_respond(encode_request(cube, 0.1))[:-8]
        with pytest.raises(ProtocolViolationError, match="truncated"):
            plugin_denoise(cube, 0.1, stream_endpoint(resp))

    def test_plugin_error_message(self, cube):
        resp = encode_error("model exploded")
        with pytest.raises(PluginError, match="model exploded"):
            plugin_denoise(cube, 0.1, stream_endpoint(resp))

    def test_empty_stream(self, cube):
        with pytest.raises(ProtocolViolationError):
            plugin_denoise(cube, 0.1, stream_endpoint(b""))


ECHO_PLUGIN = textwrap.dedent("""\
    import sys
    from scivid.plugin import echo_respond, _PREFIX, _CUBE_HEAD

    def read_exactly(n):
        data = sys.stdin.buffer.read(n)
        return data

    while True:
        head = read_exactly(_PREFIX.size + _CUBE_HEAD.size)
        if not head:
            break
        b, h, w, _ = _CUBE_HEAD.unpack_from(head, _PREFIX.size)
        payload = read_exactly(4 * b * h * w)
        sys.stdout.buffer.write(echo_respond(head + payload))
        sys.stdout.buffer.flush()
""")

SLOW_PLUGIN = "import time\ntime.sleep(30)\n"


class TestProcessEndpoint:
    def test_subprocess_echo(self, tmp_path, cube):
        script = tmp_path / "echo_plugin.py"
        script.write_text(ECHO_PLUGIN)
        ep = PluginEndpoint(command=[sys.executable, str(script)],
                            timeout=20.0)
        with PluginClient(ep) as client:
            for _ in range(2):
                out = client.denoise(cube, 0.3)
                assert np.array_equal(out, cube)

    def test_timeout(self, tmp_path, cube):
        script = tmp_path / "slow_plugin.py"
        script.write_text(SLOW_PLUGIN)
        ep = PluginEndpoint(command=[sys.executable, str(script)],
                            timeout=0.5)
        with PluginClient(ep) as client:
            with pytest.raises(PluginTimeoutError):
                client.denoise(cube, 0.3)

    def test_dead_process(self, cube):
        ep = PluginEndpoint(command=[sys.executable, "-c", "pass"],
                            timeout=2.0)
        with PluginClient(ep) as client:
            with pytest.raises(ProtocolViolationError):
                client.denoise(cube, 0.3)
                client.denoise(cube, 0.3)


class TestEndpointValidation:
    def test_needs_exactly_one_mode(self):
        with pytest.raises(ValueError):
            PluginEndpoint()
        with pytest.raises(ValueError):
            PluginEndpoint(command=["x"], loopback=True)

    def test_timeout_positive(self):
        with pytest.raises(ValueError):
            PluginEndpoint(loopback=True, timeout=0.0)
