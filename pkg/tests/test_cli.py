"""
Tests for config resolution, the command line, run artifacts and witness replay.
"""
import json
import os

import pandas as pd
import pytest

import main
from commands import build_model, execute, registry, replay, resolve_config
from crypto import derive_signing_key, sign_manifest, verify_manifest
from errors import ChecksumMismatch, ConfigError, FormatVersionMismatch, ModelNotFound
from storage import read_manifest, run_directory, save_artifact, write_manifest

QC_TOKENS = ['model=rank1defective', 'beta=2', 'n=16', 'iters=20', 'n_dirs=16', 'restarts=1',
             'profile_dirs=4', 'plot=false']


def _run(name, tokens):
    command = registry.get(name)
    return execute(command, resolve_config(command, None, tokens))


class TestResolveConfig:
    """Defaults, config files and command-line tokens."""

    def test_defaults_and_overrides(self):
        config = resolve_config(registry.get('simulate'), None, ['n=32', 't=0.5', 'wave'])
        assert config['command'] == 'simulate'
        assert config['n'] == 32 and config['t'] == 0.5 and config['wave'] is True
        assert config['model'] == 'quadratic'

    def test_file_then_tokens(self, tmp_path):
        path = tmp_path / 'run.cfg'
        path.write_text('# audit settings\nK = 2\nsamples=300\n')
        config = resolve_config(registry.get('audit-model'), str(path), ['samples=500'])
        assert config['K'] == 2.0 and config['samples'] == 500

    def test_list_values(self):
        config = resolve_config(registry.get('qc-check'), None, ['F0=1,0,0,2'])
        assert config['F0'] == [1.0, 0.0, 0.0, 2.0]

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            resolve_config(registry.get('simulate'), None, ['resolution=3'])

    def test_unreadable_value(self):
        with pytest.raises(ConfigError):
            resolve_config(registry.get('simulate'), None, ['n=many'])

    def test_positional_run_dir(self):
        config = resolve_config(registry.get('replay'), None, ['runs/qc-check-abc'])
        assert config['run_dir'] == 'runs/qc-check-abc'

    def test_model_keys_filtered_by_constructor(self):
        config = resolve_config(registry.get('qc-check'), None, ['model=quadratic', 'alpha=2', 'p=6'])
        model = build_model(config)
        assert model.alpha == 2.0

    def test_unknown_model(self):
        config = resolve_config(registry.get('qc-check'), None, ['model=neohookean'])
        with pytest.raises(ModelNotFound):
            build_model(config)


class TestArtifacts:
    """Run directories, digests and signed manifests."""

    def test_identical_configs_share_a_directory(self, output_dir):
        a = run_directory('', 'simulate', {'n': 8})
        b = run_directory('', 'simulate', {'n': 8})
        c = run_directory('', 'simulate', {'n': 16})
        assert a == b != c
        assert a.startswith(str(output_dir))

    def test_manifest_round_trip(self, output_dir):
        run_dir = run_directory('', 'test', {})
        paths = [save_artifact(run_dir, 'data.csv', pd.DataFrame({'x': [0.1, 0.2]}))]
        write_manifest(run_dir, 'test', {'n': 8}, paths)
        manifest = read_manifest(run_dir)
        assert manifest['format_version'] == 1
        assert set(manifest['artifacts']) == {'data.csv'}
        assert 'signature' not in manifest

    def test_tampered_artifact(self, output_dir):
        run_dir = run_directory('', 'test', {})
        paths = [save_artifact(run_dir, 'report.txt', 'passed\n')]
        write_manifest(run_dir, 'test', {}, paths)
        save_artifact(run_dir, 'report.txt', 'failed\n')
        with pytest.raises(ChecksumMismatch):
            read_manifest(run_dir)

    def test_wrong_format_version(self, output_dir):
        run_dir = run_directory('', 'test', {})
        save_artifact(run_dir, 'manifest.json', json.dumps({'format_version': 99}))
        with pytest.raises(FormatVersionMismatch):
            read_manifest(run_dir)

    def test_signed_manifest(self, output_dir, monkeypatch):
        monkeypatch.setenv('THERMOLAB_SIGNING_KEY', 'correct horse')
        run_dir = run_directory('', 'test', {})
        path = write_manifest(run_dir, 'test', {'n': 8}, [])
        with open(path) as f:
            manifest = json.load(f)
        assert verify_manifest(manifest, derive_signing_key('correct horse'))
        assert not verify_manifest(manifest, derive_signing_key('battery staple'))
        manifest['config']['n'] = 16
        save_artifact(run_dir, 'manifest.json', json.dumps(manifest))
        with pytest.raises(ChecksumMismatch):
            read_manifest(run_dir)

    def test_signature_covers_everything_but_itself(self):
        key = derive_signing_key('k')
        signed = sign_manifest({'a': 1}, key)
        assert verify_manifest(sign_manifest(signed, key), key)


class TestCommands:
    """End-to-end runs through the command line."""

    def test_simulate_wave(self, output_dir, capsys):
        assert main.main(['simulate', 'model=quadratic', 'wave', 'A=0.1', 'n=32', 't=0.05', 'plot=false']) == 0
        out = capsys.readouterr().out
        assert 'passed' in out
        run_dir = out.strip().splitlines()[-1].split('artifacts: ', 1)[1]
        frame = pd.read_csv(os.path.join(run_dir, 'data.csv'))
        assert 'energy_drift' in frame.columns
        assert frame.energy_drift.abs().max() < 1e-12

    def test_unknown_key_exits_with_error(self, output_dir):
        assert main.main(['simulate', 'colour=blue']) == 1

    def test_configuration_errors_map_to_one(self, output_dir):
        assert main.main(['simulate', 'wave', 'mms', 't=0.01']) == 1

    def test_counterexample_and_replay(self, output_dir):
        result = _run('qc-check', QC_TOKENS)
        assert result.exit_code == 2
        assert result.witness['kind'] == 'qc'
        assert os.path.exists(os.path.join(result.run_dir, 'witness_phi.bin'))
        confirmed = replay(result.run_dir)
        assert confirmed.exit_code == 0
        assert 'confirmed' in confirmed.report
        assert main.main(['replay', result.run_dir]) == 0

    def test_tampered_witness_is_rejected(self, output_dir):
        result = _run('qc-check', QC_TOKENS)
        path = os.path.join(result.run_dir, 'witness_psi.bin')
        with open(path, 'rb') as f:
            payload = bytearray(f.read())
        payload[-1] ^= 0xFF
        with open(path, 'wb') as f:
            f.write(payload)
        with pytest.raises(ChecksumMismatch):
            replay(result.run_dir)
        assert main.main(['replay', result.run_dir]) == 1

    def test_replay_without_witness(self, output_dir):
        result = _run('simulate', ['wave', 'n=16', 't=0.01', 'plot=false'])
        with pytest.raises(ConfigError):
            replay(result.run_dir)

    def test_young_viscous_family_reports_energy_bound(self, output_dir):
        tokens = ['generator=viscous-family', 'n=4', 'subgrid=8', 'amplitude=0.1', 't_end=0.01', 'plot=false']
        result = _run('young', tokens)
        assert result.exit_code == 0
        assert 'uniform energy bound' in result.report
        frame = pd.read_csv(os.path.join(result.run_dir, 'energy_bound.csv'))
        assert frame.eps.tolist() == [1.0 / 32, 1.0 / 64]

    def test_young_energy_bound_violation_and_replay(self, output_dir):
        tokens = ['generator=viscous-family', 'n=4', 'subgrid=8', 'amplitude=0.1', 't_end=0.01',
                  'energy_bound=-1', 'plot=false']
        result = _run('young', tokens)
        assert result.exit_code == 2
        assert result.witness['kind'] == 'energy-bound'
        assert result.witness['bound'] == -1.0
        assert replay(result.run_dir).exit_code == 0

    @pytest.mark.slow
    def test_weak_strong_witness_lists_failures(self, output_dir):
        tokens = ['deltas=0,0.01,0.1', 'meshes=16,32', 't_end=0.05', 'floor_tol=1e-14', 'plot=false']
        result = _run('weak-strong', tokens)
        assert result.exit_code == 2
        assert 'finest floor above 1e-14' in result.witness['failures']
        assert result.witness['floor_tolerance'] == 1e-14
        assert replay(result.run_dir).exit_code == 0

    @pytest.mark.slow
    def test_audit_quadratic_passes(self, output_dir):
        result = _run('audit-model', ['model=quadratic', 'alpha=1', 'K=5', 'samples=400'])
        assert result.exit_code == 0
        manifest = read_manifest(result.run_dir)
        assert set(manifest['artifacts']) == {'report.txt', 'data.csv'}
        assert manifest['exit_code'] == 0 and manifest['witness'] is None
