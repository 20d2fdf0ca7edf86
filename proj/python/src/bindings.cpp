#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ledgerml/contract/parser.hpp"
#include "ledgerml/ledger/codec.hpp"
#include "ledgerml/ledger/genesis.hpp"
#include "ledgerml/ledger/ledger.hpp"
#include "ledgerml/pfa/detmath.hpp"
#include "ledgerml/pfa/document.hpp"
#include "ledgerml/pfa/error.hpp"
#include "ledgerml/sim/sim.hpp"

namespace py = pybind11;
using namespace ledgerml;

namespace {

Value from_py(const py::handle& o) {
  if (o.is_none()) return {};
  if (py::isinstance<py::bool_>(o)) return Value::boolean(o.cast<bool>());
  if (py::isinstance<py::int_>(o)) return Value::integer(o.cast<std::int64_t>());
  if (py::isinstance<py::float_>(o)) return Value::dbl(o.cast<double>());
  if (py::isinstance<py::str>(o)) return Value::str(o.cast<std::string>());
  if (py::isinstance<py::bytes>(o)) {
    const auto s = o.cast<std::string>();
    return Value::bytes(Bytes(s.begin(), s.end()));
  }
  if (py::isinstance<py::dict>(o)) {
    Record r;
    for (auto [k, v] : o.cast<py::dict>()) r.set(k.cast<std::string>(), from_py(v));
    return Value::record(std::move(r));
  }
  if (py::isinstance<py::sequence>(o)) {
    List out;
    for (auto item : o.cast<py::sequence>()) out.push_back(from_py(item));
    return Value::list(std::move(out));
  }
  throw py::type_error("cannot convert " + std::string(py::str(o.get_type())) + " to a ledger value");
}

py::object to_py(const Value& v) {
  using K = Value::Kind;
  switch (v.kind()) {
    case K::None: return py::none();
    case K::Int: return py::int_(v.as_int());
    case K::Dec: return py::module_::import("decimal").attr("Decimal")(v.as_dec().to_string());
    case K::Dbl: return py::float_(v.as_dbl());
    case K::Str: return py::str(v.as_str());
    case K::Bool: return py::bool_(v.as_bool());
    case K::Bytes: {
      const auto& b = v.as_bytes();
      return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
    }
    case K::List: {
      py::list out;
      for (const auto& e : v.as_list()) out.append(to_py(e));
      return out;
    }
    case K::Rec: {
      py::dict out;
      const auto& r = v.as_rec();
      for (std::size_t i = 0; i < r.size(); ++i) out[py::str(r.keys[i])] = to_py(r.values[i]);
      return out;
    }
    case K::Model: return py::str("<model>");
  }
  return py::none();
}

CoinAmount amount(const py::object& o) {
  if (py::isinstance<py::int_>(o)) return CoinAmount::from_whole(o.cast<std::int64_t>());
  return CoinAmount::parse(py::str(o).cast<std::string>());
}

py::dict receipt_dict(const ledger::TxReceipt& r) {
  py::dict d;
  d["committed"] = r.committed;
  d["reason"] = r.committed ? py::object(py::none()) : py::object(py::str(std::string(contract::abort_reason_name(r.reason))));
  d["detail"] = r.detail;
  d["logs"] = r.logs;
  d["steps"] = r.steps;
  d["created"] = r.created_account ? py::object(py::int_(r.created_account->value)) : py::object(py::none());
  return d;
}

class PyChain {
 public:
  explicit PyChain(const std::string& genesis_json)
      : state_(ledger::create_genesis(ledger::parse_genesis(genesis_json))) {}

  py::dict send(std::uint64_t sender, std::uint64_t receiver, std::int32_t action, const py::object& coins,
                const py::object& asset, const py::bytes& data) {
    ledger::Transaction tx;
    tx.sender = AccountId{sender};
    tx.receiver = AccountId{receiver};
    tx.action = action;
    tx.coins = amount(coins);
    if (!asset.is_none()) {
      auto pair = asset.cast<py::tuple>();
      tx.asset = Asset{pair[0].cast<std::string>(), amount(pair[1])};
    }
    const auto raw = data.cast<std::string>();
    tx.data = Bytes(raw.begin(), raw.end());
    const auto* acct = state_.find(tx.sender);
    tx.seq = acct ? acct->seq : 0;
    const auto verdict = ledger::validate_transaction(state_, tx, &cache_);
    if (!verdict.accepted) throw ledger::LedgerError(0, verdict.reason, verdict.detail);
    auto p = ledger::build_block(state_, 0, state_.height + 1, {tx}, &cache_);
    state_ = std::move(p.state);
    return receipt_dict(p.receipts.at(0));
  }

  std::uint64_t deploy(std::uint64_t sender, const std::string& source, const py::object& coins) {
    const auto r = send(sender, 0, ledger::kDeployAction, coins, py::none(), py::bytes(source));
    return r["created"].cast<std::uint64_t>();
  }

  const ledger::Account& account(std::uint64_t id) const {
    const auto* a = state_.find(AccountId{id});
    if (a == nullptr) throw py::key_error("no account " + std::to_string(id));
    return *a;
  }

  std::string balance(std::uint64_t id) const { return account(id).coins.to_string(); }
  std::string asset_balance(std::uint64_t id, const std::string& asset) const { return account(id).asset(asset).to_string(); }
  std::uint64_t seq(std::uint64_t id) const { return account(id).seq; }

  py::object storage(std::uint64_t id, const std::string& key) const {
    const auto& st = account(id).storage;
    auto it = st.find(key);
    return it == st.end() ? py::object(py::none()) : to_py(it->second);
  }

  std::uint64_t height() const { return state_.height; }
  std::string state_root() const { return to_hex(ledger::compute_state_root(state_)); }
  bool conserved() const { return ledger::check_conservation(state_); }

 private:
  ledger::ChainState state_;
  ledger::ExecutionCache cache_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic ledger with on-chain PFA model scoring";

  static py::exception<pfa::PfaError> model_error(m, "ModelError", PyExc_ValueError);
  static py::exception<contract::ParseError> syntax_error(m, "ContractSyntaxError", PyExc_ValueError);
  static py::exception<ledger::LedgerError> ledger_error(m, "LedgerError", PyExc_ValueError);
  static py::exception<sim::SimError> sim_error(m, "SimError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pfa::PfaError& e) {
      std::string msg = std::string(pfa::error_kind_name(e.kind())) + ": " + e.what();
      model_error(msg.c_str());
    } catch (const contract::ParseError& e) {
      std::string msg = std::string(contract::parse_error_kind_name(e.kind())) + " at " + std::to_string(e.pos().line) +
                        ":" + std::to_string(e.pos().column) + ": " + e.message();
      syntax_error(msg.c_str());
    } catch (const ledger::LedgerError& e) {
      std::string msg(ledger::ledger_error_name(e.code()));
      if (e.reject_reason()) msg += " (" + std::string(ledger::reject_reason_name(*e.reject_reason())) + ")";
      msg += ": " + e.detail();
      ledger_error(msg.c_str());
    } catch (const sim::SimError& e) {
      sim_error(e.what());
    } catch (const ArithmeticError& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    }
  });

  m.def(
      "score",
      [](const std::string& model_json, const py::object& input) {
        const auto doc = pfa::parse_pfa(model_json);
        const auto r = pfa::evaluate(*doc, from_py(input));
        return py::make_tuple(to_py(r.value), r.cost);
      },
      py::arg("model_json"), py::arg("input"), "Score one input; returns (output, cost).");
  m.def(
      "describe_model", [](const std::string& model_json) { return pfa::parse_pfa(model_json)->describe(); },
      py::arg("model_json"));

  m.def("det_exp", &pfa::det_exp, py::arg("x"));
  m.def("det_ln", &pfa::det_ln, py::arg("x"));
  m.def("logit", &pfa::link_logit, py::arg("x"));
  m.def(
      "softmax", [](const std::vector<double>& v) { return pfa::link_softmax(v); }, py::arg("xs"));

  m.def(
      "format_contract", [](const std::string& src) { return contract::pretty_print(contract::parse_contract(src)); },
      py::arg("source"));
  m.def(
      "dump_contract", [](const std::string& src) { return contract::dump(contract::parse_contract(src)); },
      py::arg("source"));

  m.def(
      "run_simulation",
      [](const std::string& config_json, const std::string& base_dir) {
        const auto cfg = sim::parse_sim_config(config_json, base_dir);
        py::gil_scoped_release release;
        return sim::run_simulation(cfg).json;
      },
      py::arg("config_json"), py::arg("base_dir") = "", "Returns the canonical JSON report.");

  py::class_<PyChain>(m, "Chain")
      .def(py::init<const std::string&>(), py::arg("genesis_json"))
      .def("deploy", &PyChain::deploy, py::arg("sender"), py::arg("source"), py::arg("coins") = py::int_(0))
      .def("send", &PyChain::send, py::arg("sender"), py::arg("receiver"), py::arg("action") = 0,
           py::arg("coins") = py::int_(0), py::arg("asset") = py::none(), py::arg("data") = py::bytes(""))
      .def("balance", &PyChain::balance, py::arg("account"))
      .def("asset_balance", &PyChain::asset_balance, py::arg("account"), py::arg("asset"))
      .def("seq", &PyChain::seq, py::arg("account"))
      .def("storage", &PyChain::storage, py::arg("account"), py::arg("key"))
      .def_property_readonly("height", &PyChain::height)
      .def("state_root", &PyChain::state_root)
      .def("conserved", &PyChain::conserved);
}
