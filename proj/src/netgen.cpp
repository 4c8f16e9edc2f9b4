#include "lib2vec/netgen.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

#include "json.hpp"

namespace lib2vec {

using json = nlohmann::ordered_json;

std::size_t Netlist::num_edges() const {
  std::size_t edges = 0;
  for (const auto& inst : instances) edges += inst.pin_nets.size();
  return edges;
}

std::size_t Netlist::num_levels() const {
  std::size_t levels = 0;
  for (const auto& inst : instances) levels = std::max(levels, inst.level);
  return levels;
}

namespace {

std::size_t uniform_in(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + rng() % (hi - lo + 1);
}

struct CandidateCell {
  const Cell* cell;
  std::size_t fanin;
};

std::vector<CandidateCell> candidate_cells(const Library& lib) {
  std::vector<CandidateCell> out;
  for (const auto& [name, cell] : lib.cells) {
    if (!cell.single_output() || !cell.output_pins[0].function) continue;
    std::size_t fanin = cell.input_pins.size();
    if (fanin == 0 || fanin > 4) continue;
    out.push_back({&cell, fanin});
  }
  return out;
}

Netlist try_generate(const Library& lib, const std::vector<CandidateCell>& candidates,
                     std::uint64_t seed, const NetlistEnvelope& env) {
  std::mt19937_64 rng(seed);
  std::size_t ports = uniform_in(rng, env.min_ports, env.max_ports);
  std::size_t cells = uniform_in(rng, env.min_cells, env.max_cells);
  std::size_t levels = uniform_in(rng, env.min_levels, std::min(env.max_levels, cells));

  // One cell per level, remainder scattered at random.
  std::vector<std::size_t> per_level(levels, 1);
  for (std::size_t i = levels; i < cells; ++i) ++per_level[rng() % levels];

  Netlist nl;
  nl.name = "net_" + std::to_string(seed);
  for (std::size_t i = 0; i < ports; ++i) nl.ports.push_back("p" + std::to_string(i));

  struct NetInfo {
    std::string name;
    std::size_t level;
  };
  std::vector<NetInfo> nets;
  for (const auto& p : nl.ports) nets.push_back({p, 0});
  std::vector<std::vector<std::size_t>> nets_at_level(levels + 1);
  for (std::size_t i = 0; i < ports; ++i) nets_at_level[0].push_back(i);

  std::size_t inst_id = 0;
  for (std::size_t level = 1; level <= levels; ++level) {
    for (std::size_t c = 0; c < per_level[level - 1]; ++c) {
      const CandidateCell& cand = candidates[rng() % candidates.size()];
      Instance inst;
      inst.name = "u" + std::to_string(inst_id);
      inst.cell = cand.cell->name;
      inst.level = level;
      inst.output_net = "n" + std::to_string(inst_id);
      // First input pin attaches to the previous level to pin the instance's
      // topological level; remaining pins draw from any earlier level.
      std::size_t earlier = 0;
      for (std::size_t l = 0; l < level; ++l) earlier += nets_at_level[l].size();
      for (std::size_t k = 0; k < cand.cell->input_pins.size(); ++k) {
        std::size_t net_idx;
        if (k == 0) {
          const auto& prev = nets_at_level[level - 1];
          net_idx = prev[rng() % prev.size()];
        } else {
          std::size_t pick = rng() % earlier;
          std::size_t l = 0;
          while (pick >= nets_at_level[l].size()) pick -= nets_at_level[l++].size();
          net_idx = nets_at_level[l][pick];
        }
        inst.pin_nets[cand.cell->input_pins[k]] = nets[net_idx].name;
      }
      nets.push_back({inst.output_net, level});
      nets_at_level[level].push_back(nets.size() - 1);
      nl.instances.push_back(std::move(inst));
      ++inst_id;
    }
  }
  return nl;
}

bool within_envelope(const Netlist& nl, const NetlistEnvelope& env) {
  std::size_t edges = nl.num_edges();
  std::size_t levels = nl.num_levels();
  return nl.instances.size() >= env.min_cells && nl.instances.size() <= env.max_cells &&
         nl.ports.size() >= env.min_ports && nl.ports.size() <= env.max_ports &&
         edges >= env.min_edges && edges <= env.max_edges && levels >= env.min_levels &&
         levels <= env.max_levels;
}

}  // namespace

Netlist generate_netlist(const Library& lib, std::uint64_t seed, const NetlistEnvelope& env) {
  if (env.min_cells > env.max_cells || env.min_ports > env.max_ports ||
      env.min_edges > env.max_edges || env.min_levels > env.max_levels ||
      env.min_levels > env.max_cells)
    throw EnvelopeInfeasible("contradictory netlist envelope bounds");
  if (env.min_edges > env.max_cells * 4)
    throw EnvelopeInfeasible("edge lower bound unreachable with max fan-in 4");
  auto candidates = candidate_cells(lib);
  if (candidates.empty()) throw EmptyLibrary("no combinational single-output cells");

  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    Netlist nl = try_generate(lib, candidates, seed + attempt * 0x9e3779b97f4a7c15ull, env);
    if (within_envelope(nl, env)) {
      nl.name = "net_" + std::to_string(seed);
      return nl;
    }
  }
  throw EnvelopeInfeasible("could not satisfy netlist envelope after 1000 attempts");
}

LogicLabels simulate(const Library& lib, const Netlist& netlist,
                     const std::vector<std::vector<std::uint64_t>>& port_words,
                     std::size_t num_vectors) {
  if (port_words.size() != netlist.ports.size())
    throw Error("expected one word sequence per port");
  const std::size_t words = (num_vectors + 63) / 64;

  LogicLabels labels;
  labels.num_vectors = num_vectors;
  for (std::size_t i = 0; i < netlist.ports.size(); ++i)
    labels.net_words[netlist.ports[i]] = port_words[i];

  for (const auto& inst : netlist.instances) {
    auto cit = lib.cells.find(inst.cell);
    if (cit == lib.cells.end()) throw Error("netlist references unknown cell " + inst.cell);
    const BoolExprPtr& fn = cit->second.output_pins.at(0).function;
    std::vector<std::uint64_t> out(words, 0);
    std::map<std::string, std::uint64_t> pin_words;
    for (std::size_t w = 0; w < words; ++w) {
      for (const auto& [pin, net] : inst.pin_nets) {
        auto nit = labels.net_words.find(net);
        if (nit == labels.net_words.end()) throw UnconnectedNet("net " + net + " has no driver");
        pin_words[pin] = nit->second[w];
      }
      out[w] = eval_words(*fn, pin_words);
    }
    labels.net_words[inst.output_net] = std::move(out);
  }

  // Mask tail bits beyond num_vectors, then derive probabilities and toggles.
  const std::uint64_t tail_bits = num_vectors % 64;
  for (auto& [net, seq] : labels.net_words) {
    if (tail_bits && !seq.empty()) seq.back() &= (1ull << tail_bits) - 1;
    std::size_t ones = 0;
    for (std::uint64_t w : seq) ones += std::popcount(w);
    labels.logic_probability[net] = static_cast<double>(ones) / static_cast<double>(num_vectors);
    std::size_t toggles = 0;
    for (std::size_t w = 0; w < seq.size(); ++w) {
      std::uint64_t cur = seq[w];
      std::uint64_t shifted = cur >> 1;
      if (w + 1 < seq.size()) shifted |= (seq[w + 1] & 1ull) << 63;
      std::uint64_t diff = cur ^ shifted;
      std::size_t valid = std::min<std::size_t>(64, num_vectors - 1 - w * 64);
      if (valid < 64) diff &= valid ? (1ull << valid) - 1 : 0;
      toggles += std::popcount(diff);
    }
    labels.switching_activity[net] =
        num_vectors > 1 ? static_cast<double>(toggles) / static_cast<double>(num_vectors - 1) : 0.0;
  }
  return labels;
}

LogicLabels simulate_random(const Library& lib, const Netlist& netlist, std::size_t num_vectors,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t words = (num_vectors + 63) / 64;
  std::vector<std::vector<std::uint64_t>> port_words(netlist.ports.size());
  for (auto& seq : port_words) {
    seq.resize(words);
    for (auto& w : seq) w = rng();
  }
  return simulate(lib, netlist, port_words, num_vectors);
}

LogicLabels simulate_exhaustive(const Library& lib, const Netlist& netlist) {
  const std::size_t n = netlist.ports.size();
  if (n > kExhaustivePortLimit)
    throw Error("exhaustive simulation limited to " + std::to_string(kExhaustivePortLimit) +
                " ports");
  const std::size_t num_vectors = std::size_t{1} << n;
  const std::size_t words = (num_vectors + 63) / 64;
  std::vector<std::vector<std::uint64_t>> port_words(n, std::vector<std::uint64_t>(words, 0));
  // Vector index t assigns port i the bit (t >> i) & 1.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t word = 0;
      for (std::size_t b = 0; b < 64 && w * 64 + b < num_vectors; ++b) {
        std::size_t t = w * 64 + b;
        if ((t >> i) & 1) word |= 1ull << b;
      }
      port_words[i][w] = word;
    }
  }
  LogicLabels labels = simulate(lib, netlist, port_words, num_vectors);
  labels.exhaustive = true;
  // Enumeration order toggles are meaningless; report the stationary value.
  for (auto& [net, p] : labels.logic_probability)
    labels.switching_activity[net] = 2.0 * p * (1.0 - p);
  return labels;
}

LogicLabels simulate_auto(const Library& lib, const Netlist& netlist, std::size_t num_vectors,
                          std::uint64_t seed) {
  if (netlist.ports.size() <= kExhaustivePortLimit) return simulate_exhaustive(lib, netlist);
  return simulate_random(lib, netlist, num_vectors, seed);
}

std::string netlist_to_json(const Netlist& netlist) {
  json insts = json::array();
  for (const auto& inst : netlist.instances) {
    json conns = json::object();
    for (const auto& [pin, net] : inst.pin_nets) conns[pin] = net;
    insts.push_back(json{{"name", inst.name},
                         {"cell", inst.cell},
                         {"inputs", conns},
                         {"out", inst.output_net},
                         {"level", inst.level}});
  }
  json j{{"schema", "netlist.v1"}, {"name", netlist.name}, {"ports", netlist.ports},
         {"instances", insts}};
  return j.dump(2) + "\n";
}

Netlist netlist_from_json(const std::string& text) {
  json j = json::parse(text);
  Netlist nl;
  nl.name = j.at("name");
  nl.ports = j.at("ports").get<std::vector<std::string>>();
  for (const auto& ji : j.at("instances")) {
    Instance inst;
    inst.name = ji.at("name");
    inst.cell = ji.at("cell");
    inst.output_net = ji.at("out");
    inst.level = ji.at("level");
    for (auto it = ji.at("inputs").begin(); it != ji.at("inputs").end(); ++it)
      inst.pin_nets[it.key()] = it.value().get<std::string>();
    nl.instances.push_back(std::move(inst));
  }
  return nl;
}

std::string labels_to_jsonl(const LogicLabels& labels) {
  std::string out;
  for (const auto& [net, p] : labels.logic_probability) {
    json j{{"net", net},
           {"logic_probability", p},
           {"switching_activity", labels.switching_activity.at(net)},
           {"vectors", labels.num_vectors},
           {"exhaustive", labels.exhaustive}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace lib2vec
