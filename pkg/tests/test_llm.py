"""Provider, session, template, and LLM workflow tests with a scripted mock."""

import json
import time

import httpx
import numpy as np
import pytest

from verispice.compare import (
    RationalNetworkFunction,
    Term,
    TermKind,
    TermSum,
    parse_expression,
)
from verispice.config import RunConfig
from verispice.errors import (
    ConfigError,
    ExtractionError,
    GrammarError,
    InputError,
    ProtocolError,
    ProviderError,
)
from verispice.llm import (
    ChatSession,
    SolutionText,
    HttpProvider,
    Message,
    MockProvider,
    RateLimiter,
    extract_answer_expression,
    fix_netlist,
    generate_netlist,
    get_template,
    load_catalog,
    normalize_gate,
    recognize_circuit,
    refine_solution,
    repair_after_sim_failure,
    reply_key,
    solve_problem,
    strip_code_fences,
)
from verispice.llm import provider as provider_mod
from verispice.llm.templates import PLACEHOLDER_RE
from verispice.model import (
    Category,
    CircuitDescription,
    DetectionBox,
    DetectionOrigin,
    Provenance,
    SourceKind,
    Target,
    TargetKind,
)
from verispice.vision.raster import crop_inset, encode_png, load_gray

EXPECTED_TEMPLATES = {
    "recognition.intro",
    "recognition.components",
    "recognition.currents",
    "recognition.gate_independent",
    "recognition.gate_dependent",
    "recognition.inset",
    "recognition.summary",
    "solving.main",
    "solving.direct",
    "solving.summarize",
    "solving.feedback",
    "netlist.generate",
    "netlist.generate_synthesis",
    "netlist.generate_network",
    "netlist.generate_network_synthesis",
    "netlist.format_check",
    "netlist.accuracy_check",
    "netlist.lint_fix",
    "netlist.sim_error",
    "extract.expression",
    "extract.reprompt",
}

INSET_WORDS = {
    SourceKind.INDEPENDENT_VOLTAGE: (
        "independent voltage source",
        "positive and negative terminals of this independent voltage source",
    ),
    SourceKind.INDEPENDENT_CURRENT: (
        "independent current source",
        "current direction through this independent current source",
    ),
    SourceKind.DEPENDENT: (
        "dependent source",
        "polarity/direction of this dependent source",
    ),
}


def rendered(template_id: str, **bindings) -> str:
    return get_template(template_id).render(**bindings)


@pytest.fixture(scope="module")
def diagram() -> bytes:
    image = np.full((64, 64), 255, dtype=np.uint8)
    image[20:40, 20:40] = 0
    return encode_png(image)


def script_lead_in(provider, diagram, gates=("Yes", "No"), temperature=0.0):
    """Queue replies for the intro, components, currents, and gate steps."""
    provider.script(temperature, rendered("recognition.intro"), "Yes", images=(diagram,))
    provider.script(temperature, rendered("recognition.components"), "component list")
    provider.script(temperature, rendered("recognition.currents"), "current directions")
    provider.script(temperature, rendered("recognition.gate_independent"), gates[0])
    provider.script(temperature, rendered("recognition.gate_dependent"), gates[1])


def script_inset(provider, diagram, detection, count, reply, temperature=0.0):
    type_name, content = INSET_WORDS[detection.kind]
    prompt = rendered(
        "recognition.inset",
        NUM_COMPONENTS=str(count),
        TYPE_COMPONENT=type_name,
        RECOGNITION_CONTENT=content,
        BBOX_XYXY=str(list(detection.box)),
    )
    crop = encode_png(crop_inset(load_gray(diagram), detection.box))
    provider.script(temperature, prompt, reply, images=(crop,))


class RecordingProvider:
    """Returns numbered replies and keeps every request for inspection."""

    def __init__(self):
        self.calls = []

    def complete(self, messages, temperature):
        self.calls.append((tuple(messages), temperature))
        return f"reply {len(self.calls)}"


class TestReplyKey:
    def test_stable(self):
        assert reply_key(0.0, "hello") == reply_key(0.0, "hello")

    def test_temperature_changes_key(self):
        assert reply_key(0.0, "hello") != reply_key(0.2, "hello")

    def test_text_changes_key(self):
        assert reply_key(0.0, "hello") != reply_key(0.0, "hello!")

    def test_images_change_key(self):
        assert reply_key(0.0, "x") != reply_key(0.0, "x", [b"png"])
        assert reply_key(0.0, "x", [b"a", b"b"]) != reply_key(0.0, "x", [b"b", b"a"])


class TestMockProvider:
    def test_scripted_reply(self):
        mock = MockProvider()
        mock.script(0.0, "ping", "pong")
        reply = mock.complete([Message("user", "ping")], 0.0)
        assert reply == "pong"
        assert mock.seen == [reply_key(0.0, "ping")]

    def test_list_replies_consumed_in_order(self):
        mock = MockProvider()
        mock.script(0.0, "again", "first")
        mock.script(0.0, "again", "second")
        messages = [Message("user", "again")]
        assert mock.complete(messages, 0.0) == "first"
        assert mock.complete(messages, 0.0) == "second"
        with pytest.raises(ProviderError, match="no scripted reply"):
            mock.complete(messages, 0.0)

    def test_string_transcript_entries_repeat(self):
        mock = MockProvider({reply_key(0.0, "ping"): "pong"})
        messages = [Message("user", "ping")]
        assert mock.complete(messages, 0.0) == "pong"
        assert mock.complete(messages, 0.0) == "pong"

    def test_keys_on_last_user_message(self):
        mock = MockProvider()
        mock.script(0.0, "latest", "ok")
        history = [
            Message("user", "earlier"),
            Message("assistant", "sure"),
            Message("user", "latest"),
        ]
        assert mock.complete(history, 0.0) == "ok"

    def test_unscripted_fails_with_prompt_head(self):
        mock = MockProvider()
        with pytest.raises(ProviderError, match="never seen"):
            mock.complete([Message("user", "never seen before")], 0.0)

    def test_no_user_message(self):
        with pytest.raises(ProviderError, match="no user message"):
            MockProvider().complete([Message("assistant", "hi")], 0.0)

    def test_from_file(self, tmp_path):
        key = reply_key(0.0, "q")
        path = tmp_path / "transcript.json"
        path.write_text(json.dumps({key: ["a", "b"]}))
        mock = MockProvider.from_file(path)
        assert mock.complete([Message("user", "q")], 0.0) == "a"
        assert mock.complete([Message("user", "q")], 0.0) == "b"

    def test_from_file_missing(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            MockProvider.from_file(tmp_path / "nope.json")

    def test_from_file_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="bad transcript"):
            MockProvider.from_file(path)

    def test_from_file_not_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="JSON object"):
            MockProvider.from_file(path)


class TestRateLimiter:
    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ConfigError, match="positive"):
            RateLimiter(0)

    def test_spaces_requests(self):
        limiter = RateLimiter(100.0)
        start = time.monotonic()
        for _ in range(3):
            limiter.wait()
        assert time.monotonic() - start >= 0.02


class DummyResponse:
    def __init__(self, status_code=200, payload=None):
        self.status_code = status_code
        self._payload = {"text": "ok"} if payload is None else payload

    def json(self):
        if isinstance(self._payload, Exception):
            raise self._payload
        return self._payload


class TestHttpProvider:
    def test_missing_api_key(self, monkeypatch):
        monkeypatch.delenv("VERISPICE_API_KEY", raising=False)
        provider = HttpProvider("http://localhost:9")
        with pytest.raises(ConfigError, match="VERISPICE_API_KEY"):
            provider.complete([Message("user", "q")], 0.0)

    def test_posts_full_history(self, monkeypatch):
        monkeypatch.setenv("VERISPICE_API_KEY", "k")
        captured = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            captured.update(url=url, payload=json, headers=headers)
            return DummyResponse()

        monkeypatch.setattr(provider_mod.httpx, "post", fake_post)
        provider = HttpProvider("http://api.example/chat")
        history = [
            Message("user", "first", (b"img",)),
            Message("assistant", "sure"),
            Message("user", "second"),
        ]
        assert provider.complete(history, 0.2) == "ok"
        assert captured["url"] == "http://api.example/chat"
        assert captured["headers"]["Authorization"] == "Bearer k"
        payload = captured["payload"]
        assert payload["temperature"] == 0.2
        assert [m["role"] for m in payload["messages"]] == ["user", "assistant", "user"]
        assert payload["messages"][0]["images"] == ["aW1n"]

    def test_http_status_error(self, monkeypatch):
        monkeypatch.setenv("VERISPICE_API_KEY", "k")
        monkeypatch.setattr(
            provider_mod.httpx, "post", lambda *a, **k: DummyResponse(status_code=503)
        )
        with pytest.raises(ProviderError, match="HTTP 503"):
            HttpProvider("http://x").complete([Message("user", "q")], 0.0)

    def test_transport_error(self, monkeypatch):
        monkeypatch.setenv("VERISPICE_API_KEY", "k")

        def fake_post(*args, **kwargs):
            raise httpx.ConnectError("boom")

        monkeypatch.setattr(provider_mod.httpx, "post", fake_post)
        with pytest.raises(ProviderError, match="request failed"):
            HttpProvider("http://x").complete([Message("user", "q")], 0.0)

    def test_missing_text_field(self, monkeypatch):
        monkeypatch.setenv("VERISPICE_API_KEY", "k")
        monkeypatch.setattr(
            provider_mod.httpx, "post", lambda *a, **k: DummyResponse(payload={"data": 1})
        )
        with pytest.raises(ProviderError, match="missing a 'text'"):
            HttpProvider("http://x").complete([Message("user", "q")], 0.0)

    def test_non_string_text(self, monkeypatch):
        monkeypatch.setenv("VERISPICE_API_KEY", "k")
        monkeypatch.setattr(
            provider_mod.httpx, "post", lambda *a, **k: DummyResponse(payload={"text": 5})
        )
        with pytest.raises(ProviderError, match="not a string"):
            HttpProvider("http://x").complete([Message("user", "q")], 0.0)


class TestProviderFromConfig:
    def test_mock_requires_transcript(self):
        config = RunConfig(provider_kind="mock")
        with pytest.raises(ConfigError, match="transcript_path"):
            provider_mod.provider_from_config(config)

    def test_mock_from_transcript(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text("{}")
        config = RunConfig(provider_kind="mock", transcript_path=str(path))
        assert isinstance(provider_mod.provider_from_config(config), MockProvider)

    def test_http_requires_endpoint(self):
        config = RunConfig(provider_kind="http")
        with pytest.raises(ConfigError, match="provider_endpoint"):
            provider_mod.provider_from_config(config)

    def test_http_built_with_limiter(self):
        config = RunConfig(provider_kind="http", provider_endpoint="http://x")
        provider = provider_mod.provider_from_config(config)
        assert isinstance(provider, HttpProvider)
        assert provider.limiter is not None


class TestChatSession:
    def test_history_grows_and_is_resent(self):
        provider = RecordingProvider()
        session = ChatSession(provider, temperature=0.2)
        session.ask("one")
        session.ask("two")
        assert len(session) == 4
        first_call, second_call = provider.calls
        assert len(first_call[0]) == 1
        assert len(second_call[0]) == 3
        assert second_call[0][0].text == "one"
        assert second_call[0][1] == Message("assistant", "reply 1")
        assert second_call[1] == 0.2

    def test_history_is_a_tuple(self):
        session = ChatSession(RecordingProvider())
        session.ask("q")
        assert isinstance(session.history, tuple)
        assert [m.role for m in session.history] == ["user", "assistant"]

    def test_images_attached_to_user_turn(self):
        provider = RecordingProvider()
        session = ChatSession(provider)
        session.ask("look", images=[b"png"])
        assert provider.calls[0][0][0].images == (b"png",)

    def test_negative_temperature(self):
        with pytest.raises(InputError, match="temperature"):
            ChatSession(RecordingProvider(), temperature=-0.1)

    def test_bad_role_rejected(self):
        with pytest.raises(ProviderError, match="role"):
            Message("tool", "x")


class TestTemplates:
    def test_catalog_ids(self):
        assert set(load_catalog()) == EXPECTED_TEMPLATES

    def test_every_template_renders_clean(self):
        for template in load_catalog().values():
            bindings = {name: f"<{name.lower()}>" for name in template.placeholders}
            text = template.render(**bindings)
            assert not PLACEHOLDER_RE.search(text), template.id

    def test_placeholder_sets(self):
        assert get_template("solving.main").placeholders == {
            "PROBLEM_STATEMENT",
            "CIRCUIT_INFORMATION",
        }
        assert get_template("recognition.inset").placeholders == {
            "NUM_COMPONENTS",
            "TYPE_COMPONENT",
            "RECOGNITION_CONTENT",
            "BBOX_XYXY",
        }
        assert get_template("netlist.format_check").placeholders == frozenset()

    def test_ngspice_braces_are_not_placeholders(self):
        body = get_template("netlist.generate").body
        assert "{1e6 * (V(+) - V(-))}" in body
        assert "{time > 0 ? 15 * exp(-2 * time) : 0}" in body
        assert get_template("netlist.generate").placeholders == {
            "PROBLEM_STATEMENT",
            "CIRCUIT_INFORMATION",
        }

    def test_unbound_placeholder(self):
        with pytest.raises(InputError, match="unbound"):
            get_template("solving.main").render(PROBLEM_STATEMENT="p")

    def test_unknown_binding(self):
        with pytest.raises(InputError, match="unknown placeholders"):
            get_template("solving.summarize").render(EXTRA="x")

    def test_binding_reintroducing_placeholder(self):
        with pytest.raises(InputError, match="reintroduced"):
            get_template("solving.main").render(
                PROBLEM_STATEMENT="{CIRCUIT_INFORMATION}",
                CIRCUIT_INFORMATION="c",
            )

    def test_unknown_template_id(self):
        with pytest.raises(InputError, match="unknown prompt template"):
            get_template("recognition.bogus")


class TestNormalizeGate:
    @pytest.mark.parametrize(
        "reply, expected",
        [
            ("Yes", "yes"),
            ("no", "no"),
            ("YES.", "yes"),
            (" yes! ", "yes"),
            ('"No"', "no"),
        ],
    )
    def test_accepts(self, reply, expected):
        assert normalize_gate(reply) == expected

    @pytest.mark.parametrize("reply", ["Yeah", "yes, there is one", "", "Y", "nope"])
    def test_rejects(self, reply):
        with pytest.raises(ProtocolError, match="expected Yes or No"):
            normalize_gate(reply)


class TestStripCodeFences:
    def test_fenced(self):
        assert strip_code_fences("```spice\n* deck\n.end\n```") == "* deck\n.end"

    def test_unfenced_passthrough(self):
        assert strip_code_fences("  * deck\n.end\n") == "* deck\n.end"


class TestRecognizeCircuit:
    def run_with_inset(self, diagram, inset_reply):
        detection = DetectionBox(
            SourceKind.INDEPENDENT_VOLTAGE,
            (20, 20, 40, 40),
            DetectionOrigin.EXTERNAL_DETECTOR,
            0.9,
        )
        provider = MockProvider()
        script_lead_in(provider, diagram, gates=("Yes", "No"))
        script_inset(provider, diagram, detection, 1, inset_reply)
        provider.script(0.0, rendered("recognition.summary"), "final corrected description")
        session = ChatSession(provider)
        return recognize_circuit(session, diagram, [detection]), session

    def test_full_walk_with_voltage_inset(self, diagram):
        result, session = self.run_with_inset(diagram, "Confirmed: plus terminal on top")
        assert result.v1.text == "component list\n\ncurrent directions"
        assert result.v1.version == 1
        assert result.v1.provenance is Provenance.RECOGNIZED
        assert result.v2.text == "final corrected description"
        assert result.v2.version == 2
        assert result.v2.provenance is Provenance.POLARITY_CORRECTED
        assert result.inset_notes == []
        assert len(session) == 14

    def test_rejected_inset_is_flagged(self, diagram):
        result, _ = self.run_with_inset(diagram, "Not a match: that is a resistor")
        assert len(result.inset_notes) == 1
        assert "[20, 20, 40, 40]" in result.inset_notes[0]
        assert result.v2.text == "final corrected description"

    def test_deterministic_replay(self, diagram):
        first, _ = self.run_with_inset(diagram, "Confirmed: plus terminal on top")
        second, _ = self.run_with_inset(diagram, "Confirmed: plus terminal on top")
        assert first.v1 == second.v1
        assert first.v2 == second.v2
        assert first.inset_notes == second.inset_notes

    def test_no_gates_no_insets(self, diagram):
        detection = DetectionBox(
            SourceKind.INDEPENDENT_VOLTAGE,
            (20, 20, 40, 40),
            DetectionOrigin.EXTERNAL_DETECTOR,
            0.9,
        )
        provider = MockProvider()
        script_lead_in(provider, diagram, gates=("No", "no."))
        provider.script(0.0, rendered("recognition.summary"), "plain summary")
        result = recognize_circuit(ChatSession(provider), diagram, [detection])
        assert result.v2.text == "plain summary"
        assert len(provider.seen) == 6

    def test_gate_filters_by_kind(self, diagram):
        voltage = DetectionBox(
            SourceKind.INDEPENDENT_VOLTAGE,
            (20, 20, 40, 40),
            DetectionOrigin.EXTERNAL_DETECTOR,
            0.9,
        )
        dependent = DetectionBox(
            SourceKind.DEPENDENT, (5, 5, 25, 25), DetectionOrigin.RULE_BASED
        )
        provider = MockProvider()
        script_lead_in(provider, diagram, gates=("No", "Yes"))
        script_inset(provider, diagram, dependent, 1, "Confirmed: arrow points left")
        provider.script(0.0, rendered("recognition.summary"), "summary")
        result = recognize_circuit(ChatSession(provider), diagram, [voltage, dependent])
        assert result.v2.text == "summary"
        assert len(provider.seen) == 7

    def test_bad_gate_reply(self, diagram):
        provider = MockProvider()
        script_lead_in(provider, diagram, gates=("Maybe", "No"))
        with pytest.raises(ProtocolError, match="expected Yes or No"):
            recognize_circuit(ChatSession(provider), diagram, [])

    def test_missing_diagram_file(self, tmp_path):
        with pytest.raises(InputError, match="not found"):
            recognize_circuit(ChatSession(MockProvider()), tmp_path / "missing.png", [])


class TestSolveProblem:
    STATEMENT = "Find v_o(t) for t > 0."
    DESCRIPTION = CircuitDescription("R1 between nodes 1 and 2", 2, Provenance.POLARITY_CORRECTED)

    def test_two_turns_with_description(self):
        provider = MockProvider()
        main = rendered(
            "solving.main",
            PROBLEM_STATEMENT=self.STATEMENT,
            CIRCUIT_INFORMATION=self.DESCRIPTION.text,
        )
        provider.script(0.0, main, "long derivation")
        provider.script(0.0, rendered("solving.summarize"), "v_o(t) = 10 - 5e^{-12.5t} V")
        solution = solve_problem(ChatSession(provider), self.STATEMENT, self.DESCRIPTION)
        assert solution.full == "long derivation"
        assert "10 - 5e^{-12.5t}" in solution.concise

    def test_direct_variant_without_description(self):
        provider = MockProvider()
        direct = rendered("solving.direct", PROBLEM_STATEMENT=self.STATEMENT)
        provider.script(0.0, direct, "direct derivation")
        provider.script(0.0, rendered("solving.summarize"), "I = 2 A")
        solution = solve_problem(ChatSession(provider), self.STATEMENT, None)
        assert solution.full == "direct derivation"

    def test_empty_concise_answer(self):
        provider = MockProvider()
        direct = rendered("solving.direct", PROBLEM_STATEMENT=self.STATEMENT)
        provider.script(0.0, direct, "derivation")
        provider.script(0.0, rendered("solving.summarize"), "   \n")
        with pytest.raises(ProtocolError, match="empty final answer"):
            solve_problem(ChatSession(provider), self.STATEMENT, None)

    def test_empty_statement(self):
        with pytest.raises(InputError, match="statement is empty"):
            solve_problem(ChatSession(MockProvider()), "  ", None)

    def test_refine_appends_feedback_turn(self):
        provider = MockProvider()
        prompt = rendered("solving.feedback", FEEDBACK="sign error on R2 current")
        provider.script(0.0, prompt, "revised derivation")
        provider.script(0.0, rendered("solving.summarize"), "v = 4 V")
        session = ChatSession(provider)
        solution = refine_solution(session, "sign error on R2 current")
        assert solution.full == "revised derivation"
        assert solution.concise == "v = 4 V"
        assert len(session) == 4

    def test_refine_empty_feedback(self):
        with pytest.raises(InputError, match="feedback"):
            refine_solution(ChatSession(MockProvider()), " ")


NETLIST_REPLY = "* rc deck\nV1 1 0 5\nR1 1 2 4\n.end"

SOLUTION = SolutionText("full working", "R = 3, C = 0.25")


def grammar_error_for(text: str) -> str:
    """The exact parser message the orchestrator will embed in a reprompt."""
    try:
        parse_expression(text)
    except GrammarError as exc:
        return str(exc)
    raise AssertionError(f"{text!r} unexpectedly parsed")


class TestGenerateNetlist:
    STATEMENT = "Find v(2)."
    DESCRIPTION = CircuitDescription("V1 and R1 in series", 2, Provenance.POLARITY_CORRECTED)

    def script_three_turns(self, provider, first_prompt, final_reply):
        provider.script(0.0, first_prompt, "draft deck")
        provider.script(0.0, rendered("netlist.format_check"), "formatted deck")
        provider.script(0.0, rendered("netlist.accuracy_check"), final_reply)

    def test_three_turns_and_fence_stripping(self):
        provider = MockProvider()
        first = rendered(
            "netlist.generate",
            PROBLEM_STATEMENT=self.STATEMENT,
            CIRCUIT_INFORMATION=self.DESCRIPTION.text,
        )
        self.script_three_turns(provider, first, f"```\n{NETLIST_REPLY}\n```")
        session = ChatSession(provider)
        text = generate_netlist(session, self.STATEMENT, self.DESCRIPTION, Category.CIRCUIT_ANALYSIS)
        assert text == NETLIST_REPLY
        assert len(session) == 6

    def test_template_carries_opamp_and_switch_boilerplate(self):
        body = get_template("netlist.generate").body
        assert "OPAMP_IDEAL" in body
        assert "Switch (Closed to Open at t = 0)" in body
        assert "Switch (Open to Closed at t = 0)" in body

    def test_synthesis_embeds_solved_values(self):
        provider = MockProvider()
        first = rendered(
            "netlist.generate_synthesis",
            PROBLEM_STATEMENT=self.STATEMENT,
            CIRCUIT_INFORMATION=self.DESCRIPTION.text,
            SOLVED_VALUES=SOLUTION.concise,
        )
        assert "R = 3, C = 0.25" in first
        self.script_three_turns(provider, first, NETLIST_REPLY)
        text = generate_netlist(
            ChatSession(provider),
            self.STATEMENT,
            self.DESCRIPTION,
            Category.CIRCUIT_SYNTHESIS,
            solution=SOLUTION,
        )
        assert text == NETLIST_REPLY

    def test_synthesis_requires_solution(self):
        with pytest.raises(InputError, match="solved element values"):
            generate_netlist(
                ChatSession(MockProvider()),
                self.STATEMENT,
                self.DESCRIPTION,
                Category.NETWORK_FUNCTION_SYNTHESIS,
            )

    def test_not_simulable_category(self):
        with pytest.raises(InputError, match="not simulable"):
            generate_netlist(
                ChatSession(MockProvider()),
                self.STATEMENT,
                self.DESCRIPTION,
                Category.NO_DIAGRAM,
            )

    def test_fix_netlist_single_turn(self):
        provider = MockProvider()
        prompt = rendered("netlist.lint_fix", LINT_FINDINGS="line 3: node name too long")
        provider.script(0.0, prompt, f"```\n{NETLIST_REPLY}\n```")
        assert fix_netlist(ChatSession(provider), "line 3: node name too long") == NETLIST_REPLY

    def test_repair_after_sim_failure_single_turn(self):
        provider = MockProvider()
        prompt = rendered("netlist.sim_error", SIM_ERROR="Error: unknown device q1")
        provider.script(0.0, prompt, NETLIST_REPLY)
        assert repair_after_sim_failure(ChatSession(provider), "Error: unknown device q1") == NETLIST_REPLY


class TestExtractAnswerExpression:
    SOLUTION = SOLUTION
    TIME_TARGET = Target("v_o(t)", TargetKind.TIME_SERIES)
    NET_TARGET = Target("H(s)", TargetKind.NETWORK_FUNCTION)

    def extract_prompt(self, target):
        return rendered(
            "extract.expression",
            TARGET_NAME=target.name,
            SOLUTION_FULL=self.SOLUTION.full,
            SOLUTION_CONCISE=self.SOLUTION.concise,
        )

    def test_term_sum_answer(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.TIME_TARGET), "v_o(t) = 10 - 5*exp(-12.5*t)")
        out = extract_answer_expression(ChatSession(provider), self.SOLUTION, [self.TIME_TARGET])
        assert out["v_o(t)"] == TermSum(
            (
                Term(TermKind.CONST, 10.0),
                Term(TermKind.EXP, -5.0, rate=-12.5),
            )
        )

    def test_constant_answer(self):
        provider = MockProvider()
        target = Target("I", TargetKind.SCALAR)
        provider.script(0.0, self.extract_prompt(target), "I = 2")
        out = extract_answer_expression(ChatSession(provider), self.SOLUTION, [target])
        assert out["I"] == TermSum((Term(TermKind.CONST, 2.0),))

    def test_network_function_answer(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.NET_TARGET), "H(s) = (1)/(1 + 0.08*s)")
        out = extract_answer_expression(ChatSession(provider), self.SOLUTION, [self.NET_TARGET])
        assert out["H(s)"] == RationalNetworkFunction((1.0,), (1.0, 0.08))

    def test_fenced_reply_parses(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.TIME_TARGET), "```\n3.0\n```")
        out = extract_answer_expression(ChatSession(provider), self.SOLUTION, [self.TIME_TARGET])
        assert out["v_o(t)"] == TermSum((Term(TermKind.CONST, 3.0),))

    def test_reprompt_embeds_parser_message(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.TIME_TARGET), "10 - 5e^{-12.5t} V")
        session = ChatSession(provider)
        with pytest.raises(ProviderError, match="no scripted reply"):
            extract_answer_expression(session, self.SOLUTION, [self.TIME_TARGET])
        retry_text = session.history[-1].text
        assert "could not be parsed" in retry_text
        assert "position" in retry_text

    def test_reprompt_then_success(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.TIME_TARGET), "not an expression")
        retry = rendered(
            "extract.reprompt",
            GRAMMAR_ERROR=grammar_error_for("not an expression"),
            TARGET_NAME=self.TIME_TARGET.name,
        )
        provider.script(0.0, retry, "10 - 5*exp(-12.5*t)")
        out = extract_answer_expression(ChatSession(provider), self.SOLUTION, [self.TIME_TARGET])
        assert out["v_o(t)"].terms[0].coefficient == 10.0

    def test_two_failures_raise(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.TIME_TARGET), "garbage one")
        retry = rendered(
            "extract.reprompt",
            GRAMMAR_ERROR=grammar_error_for("garbage one"),
            TARGET_NAME=self.TIME_TARGET.name,
        )
        provider.script(0.0, retry, "garbage two")
        with pytest.raises(ExtractionError, match="after a retry"):
            extract_answer_expression(ChatSession(provider), self.SOLUTION, [self.TIME_TARGET])

    def test_family_mismatch_triggers_reprompt(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.NET_TARGET), "5.0")
        retry = rendered(
            "extract.reprompt",
            GRAMMAR_ERROR="expected a rational network function in s for this target",
            TARGET_NAME=self.NET_TARGET.name,
        )
        provider.script(0.0, retry, "(5)/(1)")
        out = extract_answer_expression(ChatSession(provider), self.SOLUTION, [self.NET_TARGET])
        assert out["H(s)"] == RationalNetworkFunction((5.0,), (1.0,))

    def test_multiple_targets_in_order(self):
        provider = MockProvider()
        provider.script(0.0, self.extract_prompt(self.TIME_TARGET), "1.5")
        provider.script(0.0, self.extract_prompt(self.NET_TARGET), "(1)/(s)")
        out = extract_answer_expression(
            ChatSession(provider), self.SOLUTION, [self.TIME_TARGET, self.NET_TARGET]
        )
        assert list(out) == ["v_o(t)", "H(s)"]

    def test_no_targets(self):
        with pytest.raises(InputError, match="no targets"):
            extract_answer_expression(ChatSession(MockProvider()), self.SOLUTION, [])
