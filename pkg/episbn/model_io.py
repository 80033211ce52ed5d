'''
Reads and writes networks (*.bn.json), evidence (*.ev.json) and experiment configurations.

A network document is a single JSON object:
    { "name": text, "nodes": [ { "id": text, "states": [text...], "parents": [id...],
                                 "cpt": [ [p...] per row ] } ] }
Rows are ordered by parent-configuration index, first parent most significant. Serialization is
canonical: keys in that order, nodes in declaration order, and every probability printed as the
shortest decimal that reads back to the identical double (never more than 17 significant digits).

An evidence document is a JSON object { nodeId: stateLabel, ... }. A plain list of node=label
pairs separated by commas or newlines is accepted as well.
'''

import json
import logging
import math
import os

from .network import Network, Node, validate
from .utils import (Algorithm, ConfigError, DocumentSemanticError, DocumentSyntaxError,
                    EvidenceError, EvidenceSpec, ExperimentConfig, GenSpec, SamplerConfig)



NODE_KEYS = ('id', 'states', 'parents', 'cpt')


def _load_json(text):
    '''json.loads with syntax errors turned into DocumentSyntaxError.'''
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise DocumentSyntaxError(f"line {err.lineno} column {err.colno}: {err.msg}",
                                  position=err.pos)


def _expect(condition, message):
    if not condition:
        raise DocumentSemanticError(message)


def _probability(value, where):
    '''Accepts a JSON number in [0, 1]; anything else is a semantic error.'''
    _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
            f"{where}: {value!r} is not a number")
    value = float(value)
    _expect(math.isfinite(value) and 0.0 <= value <= 1.0, f"{where}: {value!r} is outside [0, 1]")
    return value


def _parse_node(doc, position):
    _expect(isinstance(doc, dict), f"node #{position} is not an object")
    missing = [key for key in NODE_KEYS if key not in doc]
    _expect(not missing, f"node #{position} is missing {', '.join(missing)}")
    node_id = doc['id']
    _expect(isinstance(node_id, str), f"node #{position} id is not a string")
    states, parents, cpt = doc['states'], doc['parents'], doc['cpt']
    _expect(isinstance(states, list) and all(isinstance(s, str) for s in states),
            f"node '{node_id}': states must be a list of strings")
    _expect(isinstance(parents, list) and all(isinstance(p, str) for p in parents),
            f"node '{node_id}': parents must be a list of ids")
    _expect(isinstance(cpt, list) and all(isinstance(row, list) for row in cpt),
            f"node '{node_id}': cpt must be a list of rows")
    rows = tuple(tuple(_probability(p, f"node '{node_id}' row {r}") for p in row)
                 for r, row in enumerate(cpt))
    return Node(id=node_id, states=tuple(states), parents=tuple(parents), cpt=rows)


def parse_network(text, check=True):
    '''
    Parses a network document. With check on, the result is guaranteed to pass validate; any
    violation (unknown parent, row count, row sum, cycle, ...) raises DocumentSemanticError. With
    check off only the document structure is checked, so callers can report violations themselves.
    '''
    doc = _load_json(text)
    _expect(isinstance(doc, dict), "network document must be a JSON object")
    _expect('nodes' in doc, "network document has no 'nodes'")
    name = doc.get('name', '')
    _expect(isinstance(name, str), "network name must be a string")
    _expect(isinstance(doc['nodes'], list), "'nodes' must be a list")

    network = Network(name, [_parse_node(node, i) for i, node in enumerate(doc['nodes'])])
    if check:
        violations = validate(network)
        if violations:
            raise DocumentSemanticError("; ".join(v.message for v in violations))
    logging.debug(f"Parsed network '{name}' with {len(network)} nodes.")
    return network


def serialize_network(network):
    '''Canonical text form of a network; parse_network reads it back to an equal network.'''
    lines = ['{', f'  "name": {json.dumps(network.name)},', '  "nodes": [']
    for i, node in enumerate(network.nodes):
        lines.append('    {')
        lines.append(f'      "id": {json.dumps(node.id)},')
        lines.append(f'      "states": {json.dumps(list(node.states))},')
        lines.append(f'      "parents": {json.dumps(list(node.parents))},')
        lines.append('      "cpt": [')
        for r, row in enumerate(node.cpt):
            comma = ',' if r < len(node.cpt) - 1 else ''
            lines.append(f'        [{", ".join(repr(float(p)) for p in row)}]{comma}')
        lines.append('      ]')
        lines.append('    },' if i < len(network.nodes) - 1 else '    }')
    lines.append('  ]')
    lines.append('}')
    return '\n'.join(lines) + '\n'


def _resolve_state(network, node_id, label):
    if node_id not in network:
        raise EvidenceError(f"Evidence names unknown node '{node_id}'.")
    if isinstance(label, int) and not isinstance(label, bool):
        label = str(label)
    if not isinstance(label, str) or label not in network[node_id].states:
        raise EvidenceError(f"Unknown state {label!r} for node '{node_id}'.")
    return network[node_id].states.index(label)


def parse_evidence(text, network):
    '''
    Parses an evidence document against a network and returns a dict node id -> state index. An
    empty document is empty evidence.
    '''
    stripped = text.strip()
    if not stripped:
        return {}

    if stripped.startswith('{'):
        doc = _load_json(stripped)
        pairs = list(doc.items())
    else:
        pairs = []
        for item in stripped.replace('\n', ',').split(','):
            item = item.strip()
            if not item:
                continue
            if '=' not in item:
                raise DocumentSyntaxError(f"expected node=state, got {item!r}")
            node_id, label = item.split('=', 1)
            pairs.append((node_id.strip(), label.strip()))

    evidence = {}
    for node_id, label in pairs:
        evidence[node_id] = _resolve_state(network, node_id, label)
    # Keep declaration order so evidence behaves the same however it was written.
    return {node_id: evidence[node_id] for node_id in network.ids if node_id in evidence}


def serialize_evidence(evidence, network):
    '''Evidence as a JSON object of state labels, nodes in declaration order.'''
    doc = {node_id: network[node_id].states[evidence[node_id]]
           for node_id in network.ids if node_id in evidence}
    return json.dumps(doc, indent=2) + '\n'


def read_network(path, check=True):
    with open(path, 'r', encoding='utf-8') as doc:
        return parse_network(doc.read(), check=check)


def write_network(path, network):
    with open(path, 'w', encoding='utf-8') as doc:
        doc.write(serialize_network(network))


def read_evidence(path, network):
    with open(path, 'r', encoding='utf-8') as doc:
        return parse_evidence(doc.read(), network)


def write_evidence(path, evidence, network):
    with open(path, 'w', encoding='utf-8') as doc:
        doc.write(serialize_evidence(evidence, network))


def _config_expect(condition, message):
    if not condition:
        raise ConfigError(message)


def _integer(doc, key, default):
    '''doc[key] as an int; booleans and floats are refused, null only where the default is null.'''
    value = doc.get(key, default)
    _config_expect((value is None and default is None)
                   or (isinstance(value, int) and not isinstance(value, bool)),
                   f"{key!r} must be an integer, got {value!r}")
    return value


def _number(doc, key, default):
    value = doc.get(key, default)
    _config_expect((value is None and default is None)
                   or (isinstance(value, (int, float)) and not isinstance(value, bool)),
                   f"{key!r} must be a number, got {value!r}")
    return None if value is None else float(value)


def parse_gen_spec(doc):
    '''Builds a GenSpec from its JSON form (camelCase keys, all optional).'''
    _config_expect(isinstance(doc, dict), "generator spec must be an object")
    defaults = GenSpec()
    states = doc.get('states', defaults.states)
    if isinstance(states, int) and not isinstance(states, bool):
        states = (states, states)
    _config_expect(isinstance(states, (list, tuple)) and len(states) == 2
                   and all(isinstance(s, int) and not isinstance(s, bool) for s in states),
                   "'states' must be an integer or a [min, max] pair of integers")
    topology = doc.get('topology', defaults.topology)
    _config_expect(isinstance(topology, str), f"'topology' must be a string, got {topology!r}")
    return GenSpec(nodes=_integer(doc, 'nodes', defaults.nodes),
                   max_parents=_integer(doc, 'maxParents', defaults.max_parents),
                   states=(states[0], states[1]),
                   topology=topology,
                   depth=_integer(doc, 'depth', defaults.depth),
                   p_ext=_number(doc, 'pExt', defaults.p_ext),
                   floor=_number(doc, 'floor', defaults.floor),
                   seed=_integer(doc, 'seed', defaults.seed))


def parse_arm(doc):
    '''Builds a SamplerConfig from an arm object of an experiment config.'''
    _config_expect(isinstance(doc, dict), "each arm must be an object")
    tag = doc.get('algorithm', 'epis')
    _config_expect(tag in Algorithm.__members__, f"unknown algorithm {tag!r}")
    d = _integer(doc, 'd', None)
    _config_expect(d is None or d >= 0, "'d' must be null or >= 0")
    shards = _integer(doc, 'shards', 1)
    _config_expect(shards >= 1, "'shards' must be a positive integer")
    epsilon = _number(doc, 'epsilon', None)
    _config_expect(epsilon is None or 0 < epsilon < 1, "'epsilon' must be null or in (0, 1)")
    return SamplerConfig(algorithm=Algorithm[tag],
                         d=d,
                         cutoff=bool(doc.get('cutoff', True)),
                         epsilon=epsilon,
                         seed=_integer(doc, 'seed', None),
                         shards=shards,
                         label=doc.get('label'))


def parse_experiment_config(text, base_dir='.'):
    '''
    Parses an experiment config document. Relative network and evidence paths are resolved
    against base_dir.
    '''
    doc = _load_json(text)
    _config_expect(isinstance(doc, dict), "experiment config must be a JSON object")
    _config_expect('network' in doc, "experiment config has no 'network'")

    network = doc['network']
    if isinstance(network, str):
        network = os.path.join(base_dir, network)
    else:
        _config_expect(isinstance(network, dict) and 'gen' in network,
                       "'network' must be a path or {\"gen\": {...}}")
        network = parse_gen_spec(network['gen'])

    evidence = doc.get('evidence')
    if isinstance(evidence, str):
        evidence = os.path.join(base_dir, evidence)
    elif evidence is not None:
        _config_expect(isinstance(evidence, dict), "'evidence' must be a path or an object")
        k = _integer(evidence, 'k', 0)
        _config_expect(k >= 0, "evidence 'k' must be >= 0")
        evidence = EvidenceSpec(k=k,
                                leaves_only=bool(evidence.get('leavesOnly', False)),
                                require_positive=bool(evidence.get('requirePositive', True)))

    arms = doc.get('arms', [])
    _config_expect(isinstance(arms, list), "'arms' must be a list")
    arms = tuple(parse_arm(arm) for arm in arms)
    _config_expect(arms, "experiment config has no arms")

    schedule = doc.get('schedule', [])
    _config_expect(isinstance(schedule, list) and schedule
                   and all(isinstance(m, int) and m >= 1 for m in schedule),
                   "'schedule' must be a non-empty list of positive sample counts")
    schedule = tuple(schedule)
    _config_expect(all(a < b for a, b in zip(schedule, schedule[1:])),
                   "'schedule' must be strictly increasing")
    reps = doc.get('reps', 1)
    _config_expect(isinstance(reps, int) and reps >= 1, "'reps' must be >= 1")
    cases = doc.get('cases', 1)
    _config_expect(isinstance(cases, int) and cases >= 1, "'cases' must be >= 1")

    return ExperimentConfig(network=network,
                            evidence=evidence,
                            arms=arms,
                            schedule=schedule,
                            reps=reps,
                            seed=_integer(doc, 'seed', 0),
                            cases=cases,
                            timing=bool(doc.get('timing', False)),
                            output=doc.get('output'))


def read_experiment_config(path):
    with open(path, 'r', encoding='utf-8') as doc:
        return parse_experiment_config(doc.read(), base_dir=os.path.dirname(os.path.abspath(path)))
