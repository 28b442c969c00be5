#include "etgl/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "etgl/envs.hpp"

namespace etgl {

namespace {

constexpr const char* kHeader = "etgl-checkpoint v1";

void write_network(std::ostream& out, const std::string& name, const nn::Network& net) {
  const auto params = net.flat_parameters();
  out << "network " << name << ' ' << params.size() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto r = std::to_chars(buf, buf + sizeof buf, params[i]);
    out.write(buf, r.ptr - buf);
    out << ((i + 1) % 8 == 0 || i + 1 == params.size() ? '\n' : ' ');
  }
}

void read_network(std::istream& in, const std::string& name, nn::Network& net) {
  std::string tag, got;
  std::size_t count = 0;
  in >> tag >> got >> count;
  require(in && tag == "network" && got == name, "checkpoint: expected network " + name);
  require(count == net.parameter_count(), "checkpoint: parameter count mismatch for " + name);
  std::vector<double> params(count);
  std::string token;
  for (auto& p : params) {
    in >> token;
    const auto r = std::from_chars(token.data(), token.data() + token.size(), p);
    require(in && r.ec == std::errc() && r.ptr == token.data() + token.size(),
            "checkpoint: bad number in " + name);
  }
  net.set_flat_parameters(params);
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& env_name, const DdpgAgent& agent) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "checkpoint: cannot write '" + path + "'");
  out << kHeader << '\n' << "env " << env_name << '\n' << "hidden";
  for (int h : agent.config().hidden) out << ' ' << h;
  out << '\n';
  write_network(out, "actor", agent.actor());
  write_network(out, "critic", agent.critic());
  write_network(out, "target_actor", agent.target_actor());
  write_network(out, "target_critic", agent.target_critic());
  require(static_cast<bool>(out), "checkpoint: write failed for '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "checkpoint: cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  require(line == kHeader, "checkpoint: unsupported header in '" + path + "'");
  std::string key, env_name;
  in >> key >> env_name;
  require(in && key == "env", "checkpoint: missing env line");
  in >> key;
  require(in && key == "hidden", "checkpoint: missing hidden line");
  std::getline(in, line);
  AgentConfig config;
  config.hidden.clear();
  std::istringstream hs(line);
  for (int h; hs >> h;) config.hidden.push_back(h);
  require(!config.hidden.empty(), "checkpoint: empty hidden sizes");

  const MazeEnv env = make_env(env_name);
  Rng unused(0);
  DdpgAgent agent(env.layout().bounds, env.layout().action_box, config, unused);
  read_network(in, "actor", agent.actor());
  read_network(in, "critic", agent.critic());
  read_network(in, "target_actor", agent.target_actor());
  read_network(in, "target_critic", agent.target_critic());
  return {env_name, std::move(agent)};
}

}  // namespace etgl
