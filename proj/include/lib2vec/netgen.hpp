#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lib2vec/liberty.hpp"

namespace lib2vec {

struct NetlistEnvelope {
  std::size_t min_cells = 16, max_cells = 235;
  std::size_t min_ports = 1, max_ports = 16;
  std::size_t min_edges = 34, max_edges = 875;
  std::size_t min_levels = 7, max_levels = 111;
};

struct Instance {
  std::string name;
  std::string cell;                             // library cell name
  std::map<std::string, std::string> pin_nets;  // input pins -> driving net
  std::string output_net;
  std::size_t level = 0;  // 1 + max level over input nets; ports are level 0
};

struct Netlist {
  std::string name;
  std::vector<std::string> ports;       // primary input nets
  std::vector<Instance> instances;      // topological (level) order

  std::size_t num_edges() const;
  std::size_t num_levels() const;
};

// Level-by-level DAG construction; deterministic under seed. Retries internally
// until all statistics land inside the envelope. Throws EnvelopeInfeasible on
// contradictory bounds.
Netlist generate_netlist(const Library& lib, std::uint64_t seed,
                         const NetlistEnvelope& envelope = {});

// Zero-delay logic labels over a sequence of input vectors.
struct LogicLabels {
  std::size_t num_vectors = 0;
  bool exhaustive = false;
  // Keyed by net name (ports and instance output nets). Bit t of word t/64 is
  // the net value under input vector t.
  std::map<std::string, std::vector<std::uint64_t>> net_words;
  std::map<std::string, double> logic_probability;
  std::map<std::string, double> switching_activity;  // toggles between consecutive vectors
};

// port_words[i] holds the packed vector sequence for ports[i].
LogicLabels simulate(const Library& lib, const Netlist& netlist,
                     const std::vector<std::vector<std::uint64_t>>& port_words,
                     std::size_t num_vectors);

// Independent uniform random input vectors (seeded).
LogicLabels simulate_random(const Library& lib, const Netlist& netlist, std::size_t num_vectors,
                            std::uint64_t seed);

// All 2^n input vectors; requires <= 16 ports. Switching activity is reported
// as the analytic 2p(1-p) of each net.
LogicLabels simulate_exhaustive(const Library& lib, const Netlist& netlist);

inline constexpr std::size_t kDefaultSimVectors = 10000;
inline constexpr std::size_t kExhaustivePortLimit = 16;

// Enumerates exactly when the port count allows it, else Monte-Carlo.
LogicLabels simulate_auto(const Library& lib, const Netlist& netlist,
                          std::size_t num_vectors = kDefaultSimVectors, std::uint64_t seed = 1);

std::string netlist_to_json(const Netlist& netlist);
Netlist netlist_from_json(const std::string& text);
std::string labels_to_jsonl(const LogicLabels& labels);

}  // namespace lib2vec
