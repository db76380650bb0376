"""JSON schemas for CLI configs and emitted JSON artifacts.

Every config file carries "schema": "paramix/1" and is validated before any
computation; unknown keys are rejected so unit mistakes (MHz vs GHz fields)
fail loudly. Emitted JSON artifacts carry the same version tag and have
schemas of their own so a written file can be re-validated round-trip.
"""

from __future__ import annotations

import jsonschema

from .errors import ConfigError

SCHEMA_TAG = "paramix/1"

_TAG = {"const": SCHEMA_TAG}
_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_UNIT = {"type": "number", "minimum": 0, "maximum": 1}
_NUM_OR_NULL = {"type": ["number", "null"]}
_PUMP = {"enum": ["P1", "P2"]}
_PARITY = {"enum": ["even", "odd"]}

_JPC = {
    "type": "object",
    "properties": {
        "f_a_ghz": _POS,
        "f_b_ghz": _POS,
        "gamma_a_mhz": _POS,
        "gamma_b_mhz": _POS,
        "rho": _UNIT,
        "pump_phase_rad": _NUM,
        "phi_ext_rad": _NUM,
    },
    "required": ["f_a_ghz", "f_b_ghz", "gamma_a_mhz", "gamma_b_mhz", "rho"],
    "additionalProperties": False,
}

_JIS_FULL = {
    "type": "object",
    "properties": {
        "f_a_ghz": _POS,
        "f_b_ghz": _POS,
        "gamma_a_mhz": _POS,
        "gamma_b_mhz": _POS,
        "rho": _UNIT,
        "alpha_mag": _UNIT,
        "pump_port": _PUMP,
        "phi_ext1_rad": _NUM,
        "phi_ext2_rad": _NUM,
        "delay_length_um": _NONNEG,
        "delay_eps_eff": {"type": "number", "minimum": 1},
    },
    "required": ["f_a_ghz", "f_b_ghz", "gamma_a_mhz", "gamma_b_mhz", "rho"],
    "additionalProperties": False,
}

_JIS_PRESET = {
    "type": "object",
    "properties": {
        "preset": {"const": "reference"},
        "rho": _UNIT,
        "alpha_mag": _UNIT,
        "pump_port": _PUMP,
        "phi_ext1_rad": _NUM,
        "phi_ext2_rad": _NUM,
    },
    "required": ["preset"],
    "additionalProperties": False,
}

_JIS = {"oneOf": [_JIS_PRESET, _JIS_FULL]}

_GRID = {
    "type": "object",
    "properties": {
        "span_mhz": _POS,
        "points": {"type": "integer", "minimum": 3},
    },
    "additionalProperties": False,
}

_GYRATOR = {
    "type": "object",
    "properties": {"parity": _PARITY, "pump_port": _PUMP},
    "required": ["parity"],
    "additionalProperties": False,
}

_RECORD = {
    "type": "object",
    "properties": {
        "label": {"type": "string"},
        "t1_us": _POS,
        "t2e_us": _POS,
        "kappa_mhz": _POS,
        "chi_mhz": _POS,
        "jis": {"enum": ["on", "off"]},
        "jda": {"enum": ["on", "off"]},
        "nbar_m": _POS,
        "t_m_us": _POS,
        "i_over_sigma": _POS,
    },
    "required": ["label", "t1_us", "t2e_us", "kappa_mhz", "chi_mhz"],
    "additionalProperties": False,
}

_JRM = {
    "type": "object",
    "properties": {
        "i0_ua": _POS,
        "f_max_ghz": _POS,
        "z_res_ohm": _POS,
        "lj0_over_l": _POS,
        "lj0_over_ls": _POS,
    },
    "additionalProperties": False,
}

_PHI_GRID = {
    "type": "object",
    "properties": {
        "phi_start_rad": _NUM,
        "phi_stop_rad": _NUM,
        "points": {"type": "integer", "minimum": 2},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMAS = {
    "jpc-sweep": {
        "type": "object",
        "properties": {"schema": _TAG, "jpc": _JPC, "grid": _GRID},
        "required": ["schema", "jpc"],
        "additionalProperties": False,
    },
    "jis-sweep": {
        "type": "object",
        "properties": {"schema": _TAG, "jis": _JIS, "grid": _GRID},
        "required": ["schema", "jis"],
        "additionalProperties": False,
    },
    "jis-4port": {
        "type": "object",
        "properties": {"schema": _TAG, "jis": _JIS},
        "required": ["schema", "jis"],
        "additionalProperties": False,
    },
    "fit": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "s21_sq": _UNIT,
            "s12_sq": _UNIT,
            "pump_port": _PUMP,
        },
        "required": ["schema", "s21_sq", "s12_sq"],
        "additionalProperties": False,
    },
    "parity": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "chains": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "array", "minItems": 1, "items": _GYRATOR},
            },
        },
        "required": ["schema", "chains"],
        "additionalProperties": False,
    },
    "readout": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "records": {"type": "array", "minItems": 1, "items": _RECORD},
        },
        "required": ["schema", "records"],
        "additionalProperties": False,
    },
    "flux-curve": {
        "type": "object",
        "properties": {"schema": _TAG, "jrm": _JRM, "grid": _PHI_GRID},
        "required": ["schema"],
        "additionalProperties": False,
    },
    "bandwidth-scan": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "jis": _JIS,
            "rho_values": {"type": "array", "minItems": 1, "items": _UNIT},
            "grid": _GRID,
        },
        "required": ["schema", "jis", "rho_values"],
        "additionalProperties": False,
    },
    "selftest": {
        "type": "object",
        "properties": {"schema": _TAG},
        "required": ["schema"],
        "additionalProperties": False,
    },
}

ARTIFACT_SCHEMAS = {
    "jis_sweep_sidecar": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "direction": {"enum": ["s21", "s12"]},
            "dip_f_ghz": _NUM_OR_NULL,
            "gamma_mhz": _NUM_OR_NULL,
            "floor": _NUM_OR_NULL,
            "note": {"type": "string"},
        },
        "required": ["schema", "direction", "dip_f_ghz", "gamma_mhz", "floor"],
        "additionalProperties": False,
    },
    "fit_result": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "rho": _UNIT,
            "alpha_mag": _UNIT,
            "residual": _NONNEG,
            "alpha_identifiable": {"type": "boolean"},
        },
        "required": ["schema", "rho", "alpha_mag", "residual", "alpha_identifiable"],
        "additionalProperties": False,
    },
    "parity_report": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "calibration_phase_rad": _NUM,
            "all_match": {"type": "boolean"},
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "parities": {"type": "array", "items": _PARITY},
                        "pump_ports": {"type": "array", "items": _PUMP},
                        "t_mag": _NONNEG,
                        "xor": _PARITY,
                        "match": {"type": "boolean"},
                    },
                    "required": ["parities", "pump_ports", "t_mag", "xor", "match"],
                    "additionalProperties": False,
                },
            },
        },
        "required": ["schema", "calibration_phase_rad", "all_match", "rows"],
        "additionalProperties": False,
    },
    "readout_report": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "nbar_th": _NONNEG,
            "isolation_db": _NUM_OR_NULL,
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "label": {"type": "string"},
                        "t_phi_us": _POS,
                        "gamma_phi_per_us": _NONNEG,
                        "nbar": _NONNEG,
                        "nbar_ba": _NUM,
                        "jis": {"enum": ["on", "off", None]},
                        "jda": {"enum": ["on", "off", None]},
                    },
                    "required": [
                        "label",
                        "t_phi_us",
                        "gamma_phi_per_us",
                        "nbar",
                        "nbar_ba",
                        "jis",
                        "jda",
                    ],
                    "additionalProperties": False,
                },
            },
        },
        "required": ["schema", "nbar_th", "isolation_db", "rows"],
        "additionalProperties": False,
    },
    "four_port": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "freq_ghz": _NUM,
            "ports": {"type": "array", "items": {"type": "string"}},
            "s_real": {"type": "array", "items": {"type": "array", "items": _NUM}},
            "s_imag": {"type": "array", "items": {"type": "array", "items": _NUM}},
        },
        "required": ["schema", "freq_ghz", "ports", "s_real", "s_imag"],
        "additionalProperties": False,
    },
    "jpc_sweep_rows": {
        "type": "object",
        "properties": {
            "schema": _TAG,
            "rows": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "f_ghz": _NUM,
                        "t_sq": _NONNEG,
                        "ra_sq": _NONNEG,
                        "arg_t_rad": _NUM,
                    },
                    "required": ["f_ghz", "t_sq", "ra_sq", "arg_t_rad"],
                    "additionalProperties": False,
                },
            },
        },
        "required": ["schema", "rows"],
        "additionalProperties": False,
    },
}


def validate_config(command: str, payload) -> None:
    """Check a parsed config against the command's schema.

    Raises ConfigError with the offending JSON path in the message.
    """
    if command not in CONFIG_SCHEMAS:
        raise ConfigError(f"unknown command '{command}'")
    _validate(payload, CONFIG_SCHEMAS[command], "config")


def validate_artifact(name: str, payload) -> None:
    """Re-validate an emitted JSON artifact before writing it."""
    _validate(payload, ARTIFACT_SCHEMAS[name], name)


def _validate(payload, schema, what: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(payload), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/".join(str(p) for p in err.absolute_path) or "(root)"
        raise ConfigError(f"invalid {what} at {path}: {err.message}")
