#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <random>
#include <thread>
#include <tuple>

#include "ledgerml/contract/host.hpp"
#include "ledgerml/ledger/codec.hpp"
#include "ledgerml/ledger/ledger.hpp"
#include "ledgerml/sim/sim.hpp"

namespace ledgerml::sim {

namespace {

using ledger::Block;
using ledger::ChainState;
using ledger::Transaction;

enum class EvKind : std::uint8_t { Submit = 0, Deliver = 1, Propose = 2 };

// (tick, kind-rank, from, to, insertion-index)
using EventKey = std::tuple<std::uint64_t, std::uint8_t, std::uint32_t, std::uint32_t, std::uint64_t>;

struct Message {
  std::optional<Block> block;
  std::optional<Transaction> tx;
};

struct Event {
  EvKind kind = EvKind::Propose;
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::uint64_t height = 0;
  std::shared_ptr<const Message> msg;
};

struct PoolEntry {
  Transaction tx;
  std::optional<std::uint64_t> invalid_since;
};

struct Node {
  std::uint32_t id = 0;
  ChainState state;
  std::vector<Block> chain;
  std::vector<Hash32> hashes;
  std::vector<std::vector<ledger::TxReceipt>> receipts;
  std::map<std::pair<std::uint64_t, std::uint64_t>, PoolEntry> mempool;
  std::map<std::uint64_t, Block> buffered;
  ledger::ExecutionCache cache;

  void prune() {
    for (auto it = mempool.begin(); it != mempool.end();) {
      const auto* acct = state.find(it->second.tx.sender);
      if (acct != nullptr && it->second.tx.seq < acct->seq) it = mempool.erase(it);
      else ++it;
    }
  }

  void add_tx(const Transaction& tx) {
    const auto* acct = state.find(tx.sender);
    if (acct != nullptr && tx.seq < acct->seq) return;
    mempool.try_emplace({tx.sender.value, tx.seq}, PoolEntry{tx, std::nullopt});
  }

  void extend(const Block& b, ChainState next, std::vector<ledger::TxReceipt> rs) {
    state = std::move(next);
    chain.push_back(b);
    hashes.push_back(state.head_hash);
    receipts.push_back(std::move(rs));
    prune();
  }

  // Returns a rejection line, if any.
  std::vector<std::string> on_block(const Block& b, std::uint32_t from) {
    std::vector<std::string> notes;
    auto tag = [&](const Block& blk) {
      return "node " + std::to_string(id) + " rejected block " + std::to_string(blk.height) + " from node " +
             std::to_string(from) + ": ";
    };
    if (b.height <= state.height) {
      if (b.height == 0 || ledger::hash_block(b) != hashes[b.height - 1])
        notes.push_back(tag(b) + "conflicts with the finalized block at that height");
      return notes;
    }
    if (b.height > state.height + 1) {
      buffered.try_emplace(b.height, b);
      return notes;
    }
    auto apply = [&](const Block& blk) {
      try {
        auto r = ledger::apply_block(state, blk, &cache);
        extend(blk, std::move(r.state), std::move(r.receipts));
        return true;
      } catch (const ledger::LedgerError& e) {
        notes.push_back(tag(blk) + std::string(ledger::ledger_error_name(e.code())));
        return false;
      }
    };
    if (!apply(b)) return notes;
    while (true) {
      auto it = buffered.find(state.height + 1);
      if (it == buffered.end()) break;
      Block next = std::move(it->second);
      buffered.erase(it);
      if (!apply(next)) break;
    }
    for (auto it = buffered.begin(); it != buffered.end() && it->first <= state.height;) it = buffered.erase(it);
    return notes;
  }
};

class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    const ChainState genesis = ledger::create_genesis(cfg.genesis);
    for (std::uint32_t i = 0; i < cfg.node_count; ++i) {
      auto n = std::make_unique<Node>();
      n->id = i;
      n->state = genesis;
      nodes_.push_back(std::move(n));
    }
    max_tick_ = (cfg.blocks + 1) * cfg.block_interval + (cfg.blocks + 64) * (cfg.latency_max + 1);
    for (const auto& s : cfg.script) {
      auto msg = std::make_shared<Message>();
      msg->tx = s.tx;
      schedule(s.tick, {EvKind::Submit, s.node, s.node, 0, std::move(msg)});
    }
    for (std::uint64_t h = 1; h <= cfg.blocks; ++h) {
      const auto proposer = static_cast<std::uint32_t>(h % cfg.node_count);
      schedule(h * cfg.block_interval, {EvKind::Propose, proposer, proposer, h, nullptr});
    }
  }

  void run() {
    // Stop only at tick boundaries so both execution modes see the same events.
    std::optional<std::uint64_t> last_tick;
    while (!queue_.empty()) {
      auto it = queue_.begin();
      const std::uint64_t tick = std::get<0>(it->first);
      if (tick > max_tick_) break;
      if (tick != last_tick && all_done()) break;
      last_tick = tick;
      if (cfg_.parallel && it->second.kind == EvKind::Deliver) {
        run_delivery_batch(tick);
        continue;
      }
      Event ev = std::move(it->second);
      queue_.erase(it);
      handle(tick, ev);
    }
  }

  SimReport report() const;

 private:
  bool all_done() const {
    for (const auto& n : nodes_)
      if (n->state.height < cfg_.blocks) return false;
    return true;
  }

  void schedule(std::uint64_t tick, Event ev) {
    EventKey key{tick, static_cast<std::uint8_t>(ev.kind), ev.from, ev.to, next_index_++};
    if (!queue_.emplace(key, std::move(ev)).second) throw std::logic_error("event schedule is not total");
  }

  std::uint64_t latency() {
    const auto span = cfg_.latency_max - cfg_.latency_min + 1;
    return cfg_.latency_min + rng_() % span;
  }

  void broadcast(std::uint64_t tick, std::uint32_t from, std::shared_ptr<const Message> msg) {
    for (std::uint32_t to = 0; to < cfg_.node_count; ++to) {
      if (to == from) continue;
      schedule(tick + latency(), {EvKind::Deliver, from, to, 0, msg});
    }
  }

  void handle(std::uint64_t tick, const Event& ev) {
    switch (ev.kind) {
      case EvKind::Submit: {
        nodes_[ev.to]->add_tx(*ev.msg->tx);
        broadcast(tick, ev.to, ev.msg);
        break;
      }
      case EvKind::Deliver: deliver(ev); break;
      case EvKind::Propose: propose(tick, ev); break;
    }
  }

  void deliver(const Event& ev) {
    for (auto& line : deliver_to(*nodes_[ev.to], ev)) rejections_.push_back(std::move(line));
  }

  static std::vector<std::string> deliver_to(Node& node, const Event& ev) {
    if (ev.msg->tx) {
      node.add_tx(*ev.msg->tx);
      return {};
    }
    return node.on_block(*ev.msg->block, ev.from);
  }

  // Consecutive same-tick deliveries to distinct nodes touch disjoint state
  // and schedule nothing, so they can run concurrently; results are merged
  // in queue order.
  void run_delivery_batch(std::uint64_t tick) {
    std::vector<Event> batch;
    std::vector<bool> seen(cfg_.node_count, false);
    while (!queue_.empty()) {
      auto it = queue_.begin();
      if (std::get<0>(it->first) != tick || it->second.kind != EvKind::Deliver || seen[it->second.to]) break;
      seen[it->second.to] = true;
      batch.push_back(std::move(it->second));
      queue_.erase(it);
    }
    std::vector<std::vector<std::string>> notes(batch.size());
    if (batch.size() == 1) {
      notes[0] = deliver_to(*nodes_[batch[0].to], batch[0]);
    } else {
      std::vector<std::thread> workers;
      workers.reserve(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i)
        workers.emplace_back([&, i] { notes[i] = deliver_to(*nodes_[batch[i].to], batch[i]); });
      for (auto& w : workers) w.join();
    }
    for (auto& ns : notes)
      for (auto& line : ns) rejections_.push_back(std::move(line));
  }

  void propose(std::uint64_t tick, const Event& ev) {
    Node& node = *nodes_[ev.to];
    if (node.state.height >= ev.height) return;
    if (node.state.height + 1 != ev.height) {
      if (tick + 1 <= max_tick_) schedule(tick + 1, {EvKind::Propose, ev.from, ev.to, ev.height, nullptr});
      return;
    }
    std::vector<Transaction> candidates;
    candidates.reserve(node.mempool.size());
    for (const auto& [key, entry] : node.mempool) candidates.push_back(entry.tx);
    auto prop = ledger::build_block(node.state, node.id, tick, candidates, &node.cache);
    for (const auto& [tx, verdict] : prop.skipped) {
      auto it = node.mempool.find({tx.sender.value, tx.seq});
      if (it == node.mempool.end()) continue;
      auto& since = it->second.invalid_since;
      if (!since) since = ev.height;
      if (ev.height - *since >= 2) node.mempool.erase(it);
    }
    Block block = prop.block;
    node.extend(prop.block, std::move(prop.state), std::move(prop.receipts));
    if (cfg_.fault && cfg_.fault->node == node.id && cfg_.fault->height == ev.height) block.state_root[0] ^= 0x01;
    auto msg = std::make_shared<Message>();
    msg->block = std::move(block);
    broadcast(tick, node.id, std::move(msg));
  }

  const SimConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::map<EventKey, Event> queue_;
  std::uint64_t next_index_ = 0;
  std::uint64_t max_tick_ = 0;
  std::vector<std::string> rejections_;
};

nlohmann::ordered_json receipt_json(const ledger::TxReceipt& r) {
  nlohmann::ordered_json j;
  j["outcome"] = r.committed ? "Committed" : "Aborted";
  if (!r.committed) {
    j["reason"] = contract::abort_reason_name(r.reason);
    j["detail"] = r.detail;
  }
  j["steps"] = r.steps;
  j["logs"] = r.logs;
  if (r.created_account) j["createdAccount"] = r.created_account->value;
  return j;
}

SimReport Simulation::report() const {
  SimReport rep;
  rep.rejections = rejections_;
  std::uint64_t max_height = 0;
  std::uint64_t min_height = UINT64_MAX;
  for (const auto& n : nodes_) {
    rep.nodes.push_back({n->id, n->state.height, n->state.head_hash, ledger::compute_state_root(n->state)});
    max_height = std::max(max_height, n->state.height);
    min_height = std::min(min_height, n->state.height);
  }
  bool agreed = true;
  for (std::uint64_t h = 1; h <= max_height; ++h) {
    const Node* ref = nullptr;
    bool same = true;
    for (const auto& n : nodes_) {
      if (n->state.height < h) continue;
      if (ref == nullptr) {
        ref = n.get();
        continue;
      }
      const auto& a = ref->chain[h - 1];
      const auto& b = n->chain[h - 1];
      if (a.state_root != b.state_root || ref->hashes[h - 1] != n->hashes[h - 1]) {
        same = false;
        rep.divergences.push_back("height " + std::to_string(h) + ": node " + std::to_string(ref->id) + " root " +
                                  to_hex(a.state_root) + ", node " + std::to_string(n->id) + " root " +
                                  to_hex(b.state_root));
      } else if (ref->receipts[h - 1] != n->receipts[h - 1]) {
        same = false;
        rep.divergences.push_back("height " + std::to_string(h) + ": receipts differ between node " +
                                  std::to_string(ref->id) + " and node " + std::to_string(n->id));
      }
    }
    if (agreed && same && h <= min_height) {
      rep.chain.push_back(ref->chain[h - 1]);
      rep.receipts.push_back(ref->receipts[h - 1]);
    } else {
      agreed = false;
    }
  }
  rep.converged = rep.divergences.empty() && min_height == cfg_.blocks && rep.chain.size() == cfg_.blocks;

  nlohmann::ordered_json j;
  j["nodeCount"] = cfg_.node_count;
  j["blocks"] = cfg_.blocks;
  j["seed"] = cfg_.seed;
  j["latency"] = {cfg_.latency_min, cfg_.latency_max};
  j["blockInterval"] = cfg_.block_interval;
  j["converged"] = rep.converged;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& n : rep.nodes) {
    nlohmann::ordered_json nj;
    nj["node"] = n.node;
    nj["height"] = n.height;
    nj["headHash"] = to_hex(n.head_hash);
    nj["stateRoot"] = to_hex(n.state_root);
    j["nodes"].push_back(std::move(nj));
  }
  j["chain"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.chain.size(); ++i) {
    const auto& b = rep.chain[i];
    nlohmann::ordered_json bj;
    bj["height"] = b.height;
    bj["proposer"] = b.proposer;
    bj["tick"] = b.tick;
    bj["hash"] = to_hex(ledger::hash_block(b));
    bj["parentHash"] = to_hex(b.parent_hash);
    bj["stateRoot"] = to_hex(b.state_root);
    bj["transactions"] = b.transactions.size();
    std::uint64_t steps = 0;
    bj["receipts"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.receipts[i]) {
      steps += r.steps;
      bj["receipts"].push_back(receipt_json(r));
    }
    bj["steps"] = steps;
    j["chain"].push_back(std::move(bj));
  }
  j["divergences"] = rep.divergences;
  j["rejections"] = rep.rejections;
  rep.json = j.dump(2) + "\n";
  return rep;
}

}  // namespace

SimReport run_simulation(const SimConfig& config) {
  ChainState probe;
  try {
    probe = ledger::create_genesis(config.genesis);
  } catch (const ledger::LedgerError& e) {
    throw SimError(SimErrorCode::ConfigError, std::string("genesis: ") + e.what());
  }
  if (config.node_count < 1 || config.node_count > 16) throw SimError(SimErrorCode::ConfigError, "nodeCount out of range");
  if (config.latency_min < 1 || config.latency_min > config.latency_max || config.block_interval < 1)
    throw SimError(SimErrorCode::ConfigError, "bad latency or block interval");
  Simulation sim(config);
  sim.run();
  return sim.report();
}

SimReport run_simulation_checked(const SimConfig& config) {
  auto rep = run_simulation(config);
  if (!rep.divergences.empty()) throw SimError(SimErrorCode::DivergenceDetected, rep.divergences.front());
  return rep;
}

}  // namespace ledgerml::sim
