#include "io/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dish::io {

namespace {

using nlohmann::json;

json param_vector_json(const num::ParamVector& pv) {
  return json::parse(pv.to_json());
}

num::ParamVector param_vector_from(const json& j) {
  return num::ParamVector::from_json(j.dump());
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << j.dump() << '\n';
}

json read_file(const std::string& path, const char* expect_kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("checkpoint: malformed file " + path + ": " +
                             e.what());
  }
  if (j.value("version", -1) != kCheckpointVersion)
    throw std::runtime_error("checkpoint: version mismatch in " + path);
  if (j.value("kind", "") != expect_kind)
    throw std::runtime_error("checkpoint: expected kind '" +
                             std::string(expect_kind) + "' in " + path);
  return j;
}

void copy_params(num::ParamVector& dst, const num::ParamVector& src,
                 const std::string& path) {
  if (dst.size() != src.size())
    throw std::runtime_error("checkpoint: parameter count mismatch in " + path);
  std::copy(src.values().begin(), src.values().end(), dst.values().begin());
}

}  // namespace

void save_latent_model(const model::LatentModel& m, int K,
                       std::uint64_t lift_seed, const std::string& path) {
  const auto& c = m.config();
  json j{{"kind", "latent_model"},
         {"version", kCheckpointVersion},
         {"d_z", c.d_z},
         {"d_h", c.d_h},
         {"obs_dim", c.obs_dim},
         {"window", c.window},
         {"f_hidden", c.f_hidden},
         {"sigma_hidden", c.sigma_hidden},
         {"dec_mean_hidden", c.dec_mean_hidden},
         {"dec_std_hidden", c.dec_std_hidden},
         {"infer_hidden", c.infer_hidden},
         {"K", K},
         {"lift_seed", lift_seed},
         {"params", param_vector_json(m.params())}};
  write_file(j, path);
}

LatentModelCheckpoint load_latent_model(const std::string& path) {
  const json j = read_file(path, "latent_model");
  model::LatentModelConfig c;
  c.d_z = j.at("d_z").get<int>();
  c.d_h = j.at("d_h").get<int>();
  c.obs_dim = j.at("obs_dim").get<int>();
  c.window = j.at("window").get<int>();
  c.f_hidden = j.at("f_hidden").get<std::vector<int>>();
  c.sigma_hidden = j.at("sigma_hidden").get<std::vector<int>>();
  c.dec_mean_hidden = j.at("dec_mean_hidden").get<std::vector<int>>();
  c.dec_std_hidden = j.at("dec_std_hidden").get<std::vector<int>>();
  c.infer_hidden = j.at("infer_hidden").get<std::vector<int>>();
  num::RngStream rng(0);
  LatentModelCheckpoint out{model::LatentModel(c, rng),
                            j.at("K").get<int>(),
                            j.at("lift_seed").get<std::uint64_t>()};
  copy_params(out.model.params(), param_vector_from(j.at("params")), path);
  return out;
}

void save_policy(const policy::Policy& p, const std::string& path) {
  const auto& c = p.config();
  json j{{"kind", "policy"},
         {"version", kCheckpointVersion},
         {"obs_dim", c.obs_dim},
         {"d_h", c.d_h},
         {"action_dim", c.action_dim},
         {"actor_hidden", c.actor_hidden},
         {"value_hidden", c.value_hidden},
         {"log_std_init", c.log_std_init},
         {"n_tasks", c.n_tasks},
         {"params", param_vector_json(p.params())}};
  write_file(j, path);
}

policy::Policy load_policy(const std::string& path) {
  const json j = read_file(path, "policy");
  policy::PolicyConfig c;
  c.obs_dim = j.at("obs_dim").get<int>();
  c.d_h = j.at("d_h").get<int>();
  c.action_dim = j.at("action_dim").get<int>();
  c.actor_hidden = j.at("actor_hidden").get<std::vector<int>>();
  c.value_hidden = j.at("value_hidden").get<std::vector<int>>();
  c.log_std_init = j.at("log_std_init").get<double>();
  c.n_tasks = j.at("n_tasks").get<int>();
  num::RngStream rng(0);
  policy::Policy p(c, rng);
  copy_params(p.params(), param_vector_from(j.at("params")), path);
  return p;
}

void save_baseline(const baselines::BaselineModel& m, const std::string& path) {
  json j{{"kind", "baseline"},
         {"version", kCheckpointVersion},
         {"baseline_kind", baselines::baseline_kind_name(m.kind)},
         {"obs_dim", m.obs_dim},
         {"action_dim", m.action_dim},
         {"d_h", m.d_h},
         {"trans_layers", m.trans_spec.layer_sizes},
         {"params", param_vector_json(m.params)}};
  if (m.vae.has_value()) {
    j["vae"] = json{{"d_z", m.vae->d_z},
                    {"obs_dim", m.vae->obs_dim},
                    {"enc_layers", m.vae->enc_spec.layer_sizes},
                    {"dec_layers", m.vae->dec_spec.layer_sizes},
                    {"params", param_vector_json(m.vae->params)}};
  }
  write_file(j, path);
}

baselines::BaselineModel load_baseline(const std::string& path) {
  const json j = read_file(path, "baseline");
  baselines::BaselineModel m;
  m.kind =
      baselines::baseline_kind_from_name(j.at("baseline_kind").get<std::string>());
  m.obs_dim = j.at("obs_dim").get<int>();
  m.action_dim = j.at("action_dim").get<int>();
  m.d_h = j.at("d_h").get<int>();
  m.trans_spec = num::MlpSpec(j.at("trans_layers").get<std::vector<int>>(),
                              num::Act::kTanh, num::OutAct::kLinear);
  m.params.add_segment("trans", m.trans_spec.weight_count());
  copy_params(m.params, param_vector_from(j.at("params")), path);
  if (j.contains("vae")) {
    const json& v = j.at("vae");
    baselines::Vae vae;
    vae.d_z = v.at("d_z").get<int>();
    vae.obs_dim = v.at("obs_dim").get<int>();
    vae.enc_spec = num::MlpSpec(v.at("enc_layers").get<std::vector<int>>(),
                                num::Act::kTanh, num::OutAct::kLinear);
    vae.dec_spec = num::MlpSpec(v.at("dec_layers").get<std::vector<int>>(),
                                num::Act::kTanh, num::OutAct::kLinear);
    vae.params.add_segment("enc", vae.enc_spec.weight_count());
    vae.params.add_segment("dec", vae.dec_spec.weight_count());
    vae.params.add_segment("obs_logstd", vae.obs_dim);
    copy_params(vae.params, param_vector_from(v.at("params")), path);
    m.vae = std::move(vae);
  }
  m.validate();
  return m;
}

}  // namespace dish::io
