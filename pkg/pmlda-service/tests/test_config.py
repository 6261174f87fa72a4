import pytest

from app.config import RunConfig, load_gen_spec, load_run_config
from app.utils.errors import InputError


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestRunConfig:
    def test_defaults(self):
        config = load_run_config()
        assert config.K == 2 and config.T == 1000 and config.f == 1.0
        assert (config.lo, config.hi) == (0.4, 0.6)
        assert config.alpha_vector == [1.0, 1.0]

    def test_file_and_overrides(self, tmp_path):
        path = write(tmp_path, "# comment\nK=3\nT=50\nalpha=0.5\nlambda=2.0\nseed=7\n")
        config = load_run_config(path, {"T": 10, "seed": None})
        assert config.K == 3 and config.T == 10 and config.seed == 7
        assert config.lambda_ == 2.0
        assert config.alpha_vector == [0.5, 0.5, 0.5]

    def test_alpha_list(self, tmp_path):
        config = load_run_config(write(tmp_path, "K=3\nalpha=1,2,3\n"))
        hp = config.hyperparams()
        assert hp.alpha == [1.0, 2.0, 3.0] and hp.K == 3

    def test_alpha_length_mismatch(self, tmp_path):
        with pytest.raises(InputError):
            load_run_config(write(tmp_path, "K=3\nalpha=1,2\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(InputError, match="bogus"):
            load_run_config(write(tmp_path, "bogus=1\n"))
        with pytest.raises(InputError):
            load_run_config(None, {"bogus": 1})

    def test_empty_value(self, tmp_path):
        with pytest.raises(InputError):
            load_run_config(write(tmp_path, "T=\n"))

    @pytest.mark.parametrize("text", ["K=1\n", "T=0\n", "f=-1\n", "m=1.0\n",
                                      "entropy_window=20\n", "lo=0.7\nhi=0.3\n", "lambda=0\n"])
    def test_invalid_values(self, tmp_path, text):
        with pytest.raises(InputError):
            load_run_config(write(tmp_path, text))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_run_config(str(tmp_path / "missing.cfg"))

    def test_sampler_config_pins(self):
        config = RunConfig.model_validate({"fix_pi": "0.25,0.75", "fix_s": 5.0, "thin": 3})
        sampler = config.sampler_config(n_workers=4, debug_checks=True)
        assert sampler.fix_pi == [0.25, 0.75] and sampler.fix_s == 5.0
        assert sampler.n_workers == 4 and sampler.debug_checks and sampler.thin == 3

    def test_pinned_pi_off_simplex(self):
        config = RunConfig.model_validate({"fix_pi": "0.5,0.6"})
        with pytest.raises(ValueError):
            config.sampler_config()


class TestGenSpec:
    def test_matrices(self, tmp_path):
        path = write(tmp_path, "means=-4,-4;6,6\nsigma2=2\nalpha=1,1\nlambda=0.1\nD=5\nN=20\n", "gen.cfg")
        spec = load_gen_spec(path, {"seed": 3, "D": None})
        assert spec.means == [[-4.0, -4.0], [6.0, 6.0]]
        assert spec.sigma2 == 2.0 and spec.D == 5 and spec.N == 20 and spec.seed == 3

    def test_fixed_memberships(self, tmp_path):
        path = write(tmp_path, "means=0;5\ncov_diag=1;3\nfixed_pi=0.5,0.5\nfixed_s=1\nfixed_z=0.5,0.5\n", "gen.cfg")
        spec = load_gen_spec(path)
        assert spec.cov_diag == [[1.0], [3.0]] and spec.fixed_z == [0.5, 0.5]

    def test_needs_pi_source(self, tmp_path):
        with pytest.raises(InputError):
            load_gen_spec(write(tmp_path, "means=0;5\nlambda=1\n", "gen.cfg"))
