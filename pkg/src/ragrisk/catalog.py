"""Workspace catalog files: strict parsing, located errors, canonical output.

A workspace directory holds three documents (``model``, ``threats``,
``controls``), each as YAML or JSON over the same schema. Parsing is
strict: unknown keys, wrong types, and out-of-range factor values are
rejected with the file and document path spelled out, because a silently
ignored typo in a factor name would corrupt the risk arithmetic.

Saving is canonical: list order is preserved as declared, map keys are
sorted, text is UTF-8 with LF line endings. Saving a loaded workspace and
loading it again is the identity, and a second save is a byte fixed point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NoReturn, Sequence

import yaml

from ragrisk.model import (
    ActorClass,
    AttackFlow,
    Component,
    ComponentKind,
    Control,
    DataFlow,
    Exposure,
    FactorAdjustment,
    FACTOR_MAX,
    FACTOR_MIN,
    Finding,
    FlowStep,
    Framework,
    ImpactFactors,
    IMPACT_FACTORS,
    LikelihoodFactors,
    LIKELIHOOD_FACTORS,
    PyramidLayer,
    SystemModel,
    TechniqueRef,
    ThreatScenario,
    TrustBoundary,
    WeaknessRef,
    validate_workspace,
)

SCHEMA_VERSION = "1"
BASE_NAMES = ("model", "threats", "controls")


@dataclass(frozen=True)
class SourceLocation:
    """A 1-based position inside a catalog file."""

    file: str
    line: int
    column: int
    path: str = ""

    def __str__(self) -> str:
        text = f"{self.file}:{self.line}:{self.column}"
        if self.path:
            text = f"{text} ({self.path})"
        return text


class CatalogError(Exception):
    """Base class for everything that can go wrong while loading."""


class ParseError(CatalogError):
    """The file is not syntactically valid YAML/JSON, or is missing."""

    def __init__(self, message: str, location: SourceLocation | None = None):
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SchemaError(CatalogError):
    """The file parsed but has the wrong shape, type, or value domain."""

    def __init__(self, message: str, *, file: str, path: str):
        self.message = message
        self.file = file
        self.path = path
        super().__init__(f"{file}: {path}: {message}")


class ValidationError(CatalogError):
    """The workspace parsed cleanly but violates cross-reference rules."""

    def __init__(self, findings: Sequence[Finding]):
        self.findings = list(findings)
        count = len(self.findings)
        noun = "finding" if count == 1 else "findings"
        super().__init__(f"workspace failed validation with {count} {noun}")


@dataclass(frozen=True)
class WorkspaceMeta:
    schema_version: str
    title: str


@dataclass(frozen=True)
class Workspace:
    model: SystemModel
    threats: tuple[ThreatScenario, ...]
    controls: tuple[Control, ...]
    meta: WorkspaceMeta

    def get_threat(self, threat_id: str) -> ThreatScenario | None:
        for threat in self.threats:
            if threat.id == threat_id:
                return threat
        return None

    def get_control(self, control_id: str) -> Control | None:
        for control in self.controls:
            if control.id == control_id:
                return control
        return None

    def control_ids(self) -> tuple[str, ...]:
        return tuple(control.id for control in self.controls)

    def find_flow(self, flow_id: str) -> tuple[ThreatScenario, AttackFlow] | None:
        for threat in self.threats:
            for flow in threat.flows:
                if flow.id == flow_id:
                    return threat, flow
        return None


class _StrictYamlLoader(yaml.SafeLoader):
    """SafeLoader that rejects duplicate mapping keys instead of last-wins."""

    def construct_mapping(self, node: Any, deep: bool = False) -> dict:
        seen: set[Any] = set()
        for key_node, _value_node in node.value:
            key = self.construct_object(key_node, deep=True)
            try:
                duplicate = key in seen
            except TypeError:
                continue  # unhashable key; the base loader rejects it anyway
            if duplicate:
                mark = key_node.start_mark
                raise ParseError(
                    f"duplicate mapping key {key!r}",
                    SourceLocation(mark.name, mark.line + 1, mark.column + 1),
                )
            seen.add(key)
        return super().construct_mapping(node, deep)


def _parse_file(path: Path) -> Any:
    if path.suffix == ".json":
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(
                exc.msg, SourceLocation(str(path), exc.lineno, exc.colno)
            ) from exc
    with path.open(encoding="utf-8") as handle:
        try:
            return yaml.load(handle, Loader=_StrictYamlLoader)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            if mark is not None:
                location = SourceLocation(str(path), mark.line + 1, mark.column + 1)
            else:
                location = SourceLocation(str(path), 1, 1)
            raise ParseError(str(exc).replace("\n", " "), location) from exc


def _resolve_files(root: Path) -> dict[str, Path]:
    if not root.is_dir():
        raise ParseError(
            f"workspace directory {str(root)!r} does not exist; it must "
            "contain model.yaml, threats.yaml and controls.yaml "
            "(or .json equivalents)"
        )
    found: dict[str, Path] = {}
    missing: list[str] = []
    for base in BASE_NAMES:
        yaml_path = root / f"{base}.yaml"
        json_path = root / f"{base}.json"
        if yaml_path.is_file():
            found[base] = yaml_path
        elif json_path.is_file():
            found[base] = json_path
        else:
            missing.append(f"{base}.yaml")
    if missing:
        raise ParseError(
            "missing required workspace file(s): "
            + ", ".join(missing)
            + f" (or .json equivalents) in {str(root)!r}"
        )
    return found


class _Decoder:
    """Walks parsed data with a running document path for error messages."""

    def __init__(self, file: str):
        self.file = file

    def fail(self, path: str, message: str) -> NoReturn:
        raise SchemaError(message, file=self.file, path=path)

    @staticmethod
    def _describe(value: Any) -> str:
        if value is None:
            return "null"
        if isinstance(value, bool):
            return "a boolean"
        if isinstance(value, int):
            return "an integer"
        if isinstance(value, float):
            return "a float"
        if isinstance(value, str):
            return "a string"
        if isinstance(value, list):
            return "a list"
        if isinstance(value, dict):
            return "a mapping"
        return type(value).__name__

    def mapping(
        self,
        value: Any,
        path: str,
        required: Sequence[str],
        optional: Sequence[str] = (),
    ) -> dict:
        if not isinstance(value, dict):
            self.fail(path, f"expected a mapping, got {self._describe(value)}")
        allowed = set(required) | set(optional)
        unknown = sorted(str(key) for key in value if key not in allowed)
        if unknown:
            self.fail(path, "unknown key(s): " + ", ".join(unknown))
        missing = [key for key in required if key not in value]
        if missing:
            self.fail(path, "missing required key(s): " + ", ".join(missing))
        return value

    def string(self, value: Any, path: str) -> str:
        if not isinstance(value, str):
            self.fail(path, f"expected a string, got {self._describe(value)}")
        return value

    def integer(self, value: Any, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {self._describe(value)}")
        return value

    def boolean(self, value: Any, path: str) -> bool:
        if not isinstance(value, bool):
            self.fail(path, f"expected a boolean, got {self._describe(value)}")
        return value

    def sequence(self, value: Any, path: str) -> list:
        if not isinstance(value, list):
            self.fail(path, f"expected a list, got {self._describe(value)}")
        return value

    def factor(self, value: Any, path: str) -> int:
        number = self.integer(value, path)
        if not FACTOR_MIN <= number <= FACTOR_MAX:
            self.fail(
                path,
                f"factor value {number} is outside the legal range "
                f"{FACTOR_MIN}-{FACTOR_MAX}",
            )
        return number

    def enum(self, value: Any, path: str, enum_type: type) -> Any:
        text = self.string(value, path)
        try:
            return enum_type(text)
        except ValueError:
            allowed = ", ".join(member.value for member in enum_type)
            self.fail(path, f"{text!r} is not one of: {allowed}")

    def schema_version(self, doc: Any, path: str = "schema_version") -> str:
        version = self.string(doc.get("schema_version"), path)
        if version != SCHEMA_VERSION:
            self.fail(
                path,
                f"unsupported schema_version {version!r}; "
                f"this tool reads version {SCHEMA_VERSION!r}",
            )
        return version


def _decode_component(dec: _Decoder, raw: Any, path: str) -> Component:
    data = dec.mapping(raw, path, required=("id", "name", "kind", "exposure"))
    return Component(
        id=dec.string(data["id"], f"{path}.id"),
        name=dec.string(data["name"], f"{path}.name"),
        kind=dec.enum(data["kind"], f"{path}.kind", ComponentKind),
        exposure=dec.enum(data["exposure"], f"{path}.exposure", Exposure),
    )


def _decode_data_flow(dec: _Decoder, raw: Any, path: str) -> DataFlow:
    data = dec.mapping(
        raw, path, required=("id", "from", "to", "data_kind"), optional=("loopback",)
    )
    loopback = False
    if "loopback" in data:
        loopback = dec.boolean(data["loopback"], f"{path}.loopback")
    return DataFlow(
        id=dec.string(data["id"], f"{path}.id"),
        source=dec.string(data["from"], f"{path}.from"),
        target=dec.string(data["to"], f"{path}.to"),
        data_kind=dec.string(data["data_kind"], f"{path}.data_kind"),
        loopback=loopback,
    )


def _decode_boundary(dec: _Decoder, raw: Any, path: str) -> TrustBoundary:
    data = dec.mapping(raw, path, required=("id", "name", "members"))
    members = [
        dec.string(member, f"{path}.members[{i}]")
        for i, member in enumerate(dec.sequence(data["members"], f"{path}.members"))
    ]
    return TrustBoundary(
        id=dec.string(data["id"], f"{path}.id"),
        name=dec.string(data["name"], f"{path}.name"),
        members=tuple(members),
    )


def _decode_model_file(dec: _Decoder, doc: Any) -> tuple[SystemModel, str]:
    data = dec.mapping(doc, "$", required=("schema_version", "title", "model"))
    dec.schema_version(data)
    title = dec.string(data["title"], "title")
    body = dec.mapping(
        data["model"],
        "model",
        required=("id", "name", "components", "data_flows", "trust_boundaries"),
    )
    components = [
        _decode_component(dec, raw, f"model.components[{i}]")
        for i, raw in enumerate(
            dec.sequence(body["components"], "model.components")
        )
    ]
    flows = [
        _decode_data_flow(dec, raw, f"model.data_flows[{i}]")
        for i, raw in enumerate(
            dec.sequence(body["data_flows"], "model.data_flows")
        )
    ]
    boundaries = [
        _decode_boundary(dec, raw, f"model.trust_boundaries[{i}]")
        for i, raw in enumerate(
            dec.sequence(body["trust_boundaries"], "model.trust_boundaries")
        )
    ]
    model = SystemModel(
        id=dec.string(body["id"], "model.id"),
        name=dec.string(body["name"], "model.name"),
        components=tuple(components),
        data_flows=tuple(flows),
        trust_boundaries=tuple(boundaries),
    )
    return model, title


def _decode_technique(dec: _Decoder, raw: Any, path: str) -> TechniqueRef:
    data = dec.mapping(raw, path, required=("framework", "technique_id", "name"))
    return TechniqueRef(
        framework=dec.enum(data["framework"], f"{path}.framework", Framework),
        technique_id=dec.string(data["technique_id"], f"{path}.technique_id"),
        name=dec.string(data["name"], f"{path}.name"),
    )


def _decode_weakness(dec: _Decoder, raw: Any, path: str) -> WeaknessRef:
    data = dec.mapping(raw, path, required=("cwe_id", "title"), optional=("note",))
    note = None
    if "note" in data and data["note"] is not None:
        note = dec.string(data["note"], f"{path}.note")
    return WeaknessRef(
        cwe_id=dec.string(data["cwe_id"], f"{path}.cwe_id"),
        title=dec.string(data["title"], f"{path}.title"),
        note=note,
    )


def _decode_step(dec: _Decoder, raw: Any, path: str) -> FlowStep:
    data = dec.mapping(
        raw, path, required=("index", "stage"), optional=("technique", "target")
    )
    technique = None
    if "technique" in data and data["technique"] is not None:
        technique = _decode_technique(dec, data["technique"], f"{path}.technique")
    target = None
    if "target" in data and data["target"] is not None:
        target = dec.string(data["target"], f"{path}.target")
    return FlowStep(
        index=dec.integer(data["index"], f"{path}.index"),
        stage=dec.string(data["stage"], f"{path}.stage"),
        technique=technique,
        target=target,
    )


def _decode_attack_flow(dec: _Decoder, raw: Any, path: str) -> AttackFlow:
    data = dec.mapping(raw, path, required=("id", "steps", "entry_points"))
    steps = [
        _decode_step(dec, step, f"{path}.steps[{i}]")
        for i, step in enumerate(dec.sequence(data["steps"], f"{path}.steps"))
    ]
    entry_raw = data["entry_points"]
    if not isinstance(entry_raw, dict):
        dec.fail(f"{path}.entry_points", "expected a mapping of actor to step index")
    entry_points: dict[ActorClass, int] = {}
    for key, value in entry_raw.items():
        actor = dec.enum(key, f"{path}.entry_points", ActorClass)
        entry_points[actor] = dec.integer(
            value, f"{path}.entry_points.{actor.value}"
        )
    return AttackFlow(
        id=dec.string(data["id"], f"{path}.id"),
        steps=tuple(steps),
        entry_points=entry_points,
    )


def _decode_likelihood(dec: _Decoder, raw: Any, path: str) -> LikelihoodFactors:
    data = dec.mapping(raw, path, required=LIKELIHOOD_FACTORS)
    return LikelihoodFactors(
        **{name: dec.factor(data[name], f"{path}.{name}") for name in LIKELIHOOD_FACTORS}
    )


def _decode_impact(dec: _Decoder, raw: Any, path: str) -> ImpactFactors:
    data = dec.mapping(raw, path, required=IMPACT_FACTORS)
    return ImpactFactors(
        **{name: dec.factor(data[name], f"{path}.{name}") for name in IMPACT_FACTORS}
    )


def _decode_threat(dec: _Decoder, raw: Any, path: str) -> ThreatScenario:
    data = dec.mapping(
        raw,
        path,
        required=(
            "id",
            "name",
            "techniques",
            "targets",
            "inherent_likelihood",
            "inherent_impact",
        ),
        optional=("weaknesses", "flows"),
    )
    techniques = [
        _decode_technique(dec, item, f"{path}.techniques[{i}]")
        for i, item in enumerate(dec.sequence(data["techniques"], f"{path}.techniques"))
    ]
    weaknesses = [
        _decode_weakness(dec, item, f"{path}.weaknesses[{i}]")
        for i, item in enumerate(
            dec.sequence(data.get("weaknesses", []), f"{path}.weaknesses")
        )
    ]
    targets = [
        dec.string(item, f"{path}.targets[{i}]")
        for i, item in enumerate(dec.sequence(data["targets"], f"{path}.targets"))
    ]
    flows = [
        _decode_attack_flow(dec, item, f"{path}.flows[{i}]")
        for i, item in enumerate(dec.sequence(data.get("flows", []), f"{path}.flows"))
    ]
    return ThreatScenario(
        id=dec.string(data["id"], f"{path}.id"),
        name=dec.string(data["name"], f"{path}.name"),
        techniques=tuple(techniques),
        weaknesses=tuple(weaknesses),
        targets=tuple(targets),
        inherent_likelihood=_decode_likelihood(
            dec, data["inherent_likelihood"], f"{path}.inherent_likelihood"
        ),
        inherent_impact=_decode_impact(
            dec, data["inherent_impact"], f"{path}.inherent_impact"
        ),
        flows=tuple(flows),
    )


def _decode_threats_file(dec: _Decoder, doc: Any) -> tuple[ThreatScenario, ...]:
    data = dec.mapping(doc, "$", required=("schema_version", "threats"))
    dec.schema_version(data)
    return tuple(
        _decode_threat(dec, raw, f"threats[{i}]")
        for i, raw in enumerate(dec.sequence(data["threats"], "threats"))
    )


def _decode_adjustment(dec: _Decoder, raw: Any, path: str) -> FactorAdjustment:
    data = dec.mapping(raw, path, required=("factor", "delta"))
    factor = dec.string(data["factor"], f"{path}.factor")
    delta = dec.integer(data["delta"], f"{path}.delta")
    if abs(delta) > FACTOR_MAX:
        dec.fail(
            f"{path}.delta",
            f"delta {delta} exceeds the magnitude limit of {FACTOR_MAX}",
        )
    return FactorAdjustment(factor=factor, delta=delta)


def _decode_control(dec: _Decoder, raw: Any, path: str) -> Control:
    data = dec.mapping(
        raw,
        path,
        required=("id", "name", "description", "layers"),
        optional=("adjustments",),
    )
    layers = [
        dec.enum(item, f"{path}.layers[{i}]", PyramidLayer)
        for i, item in enumerate(dec.sequence(data["layers"], f"{path}.layers"))
    ]
    adjustments = [
        _decode_adjustment(dec, item, f"{path}.adjustments[{i}]")
        for i, item in enumerate(
            dec.sequence(data.get("adjustments", []), f"{path}.adjustments")
        )
    ]
    return Control(
        id=dec.string(data["id"], f"{path}.id"),
        name=dec.string(data["name"], f"{path}.name"),
        description=dec.string(data["description"], f"{path}.description"),
        layers=tuple(layers),
        adjustments=tuple(adjustments),
    )


def _decode_controls_file(dec: _Decoder, doc: Any) -> tuple[Control, ...]:
    data = dec.mapping(doc, "$", required=("schema_version", "controls"))
    dec.schema_version(data)
    return tuple(
        _decode_control(dec, raw, f"controls[{i}]")
        for i, raw in enumerate(dec.sequence(data["controls"], "controls"))
    )


def load_workspace(root_dir: str | Path) -> Workspace:
    """Load and fully validate the workspace under ``root_dir``.

    Raises ParseError for unreadable syntax or missing files, SchemaError
    for shape/type/domain problems, and ValidationError (embedding the
    finding list) when the parsed catalogs break cross-reference rules.
    """
    root = Path(root_dir)
    files = _resolve_files(root)
    model_doc = _parse_file(files["model"])
    threats_doc = _parse_file(files["threats"])
    controls_doc = _parse_file(files["controls"])

    model, title = _decode_model_file(_Decoder(str(files["model"])), model_doc)
    threats = _decode_threats_file(_Decoder(str(files["threats"])), threats_doc)
    controls = _decode_controls_file(_Decoder(str(files["controls"])), controls_doc)

    workspace = Workspace(
        model=model,
        threats=threats,
        controls=controls,
        meta=WorkspaceMeta(schema_version=SCHEMA_VERSION, title=title),
    )
    findings = validate_workspace(model, list(threats), list(controls))
    if findings:
        raise ValidationError(findings)
    return workspace


def _encode_technique(ref: TechniqueRef) -> dict:
    return {
        "framework": ref.framework.value,
        "technique_id": ref.technique_id,
        "name": ref.name,
    }


def _encode_step(step: FlowStep) -> dict:
    data: dict[str, Any] = {"index": step.index, "stage": step.stage}
    if step.technique is not None:
        data["technique"] = _encode_technique(step.technique)
    if step.target is not None:
        data["target"] = step.target
    return data


def _encode_model_file(ws: Workspace) -> dict:
    flows = []
    for flow in ws.model.data_flows:
        item: dict[str, Any] = {
            "id": flow.id,
            "from": flow.source,
            "to": flow.target,
            "data_kind": flow.data_kind,
        }
        if flow.loopback:
            item["loopback"] = True
        flows.append(item)
    return {
        "schema_version": ws.meta.schema_version,
        "title": ws.meta.title,
        "model": {
            "id": ws.model.id,
            "name": ws.model.name,
            "components": [
                {
                    "id": c.id,
                    "name": c.name,
                    "kind": c.kind.value,
                    "exposure": c.exposure.value,
                }
                for c in ws.model.components
            ],
            "data_flows": flows,
            "trust_boundaries": [
                {"id": b.id, "name": b.name, "members": list(b.members)}
                for b in ws.model.trust_boundaries
            ],
        },
    }


def _encode_threats_file(ws: Workspace) -> dict:
    threats = []
    for threat in ws.threats:
        item: dict[str, Any] = {
            "id": threat.id,
            "name": threat.name,
            "techniques": [_encode_technique(t) for t in threat.techniques],
            "targets": list(threat.targets),
            "inherent_likelihood": threat.inherent_likelihood.as_dict(),
            "inherent_impact": threat.inherent_impact.as_dict(),
        }
        if threat.weaknesses:
            weaknesses = []
            for weakness in threat.weaknesses:
                entry: dict[str, Any] = {
                    "cwe_id": weakness.cwe_id,
                    "title": weakness.title,
                }
                if weakness.note is not None:
                    entry["note"] = weakness.note
                weaknesses.append(entry)
            item["weaknesses"] = weaknesses
        if threat.flows:
            item["flows"] = [
                {
                    "id": flow.id,
                    "steps": [_encode_step(step) for step in flow.steps],
                    "entry_points": {
                        actor.value: index
                        for actor, index in flow.entry_points.items()
                    },
                }
                for flow in threat.flows
            ]
        threats.append(item)
    return {"schema_version": ws.meta.schema_version, "threats": threats}


def _encode_controls_file(ws: Workspace) -> dict:
    controls = []
    for control in ws.controls:
        item: dict[str, Any] = {
            "id": control.id,
            "name": control.name,
            "description": control.description,
            "layers": [layer.value for layer in control.layers],
        }
        if control.adjustments:
            item["adjustments"] = [
                {"factor": a.factor, "delta": a.delta} for a in control.adjustments
            ]
        controls.append(item)
    return {"schema_version": ws.meta.schema_version, "controls": controls}


def save_workspace(ws: Workspace, root_dir: str | Path, fmt: str = "yaml") -> None:
    """Write the three catalog files under ``root_dir`` in canonical form.

    ``fmt`` selects the concrete syntax ("yaml" or "json"). Output key
    order is sorted, list order is the declaration order, encoding is
    UTF-8 with LF line endings; the same workspace always produces the
    same bytes.
    """
    if fmt not in ("yaml", "json"):
        raise ValueError(f"unsupported format {fmt!r}; use 'yaml' or 'json'")
    root = Path(root_dir)
    root.mkdir(parents=True, exist_ok=True)
    documents = {
        "model": _encode_model_file(ws),
        "threats": _encode_threats_file(ws),
        "controls": _encode_controls_file(ws),
    }
    for base, doc in documents.items():
        if fmt == "yaml":
            text = yaml.safe_dump(
                doc,
                sort_keys=True,
                allow_unicode=True,
                default_flow_style=False,
                width=10_000,
            )
        else:
            text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
            text += "\n"
        (root / f"{base}.{fmt}").write_text(text, encoding="utf-8", newline="\n")
