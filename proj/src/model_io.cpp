#include "lmnl/model_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lmnl/error.hpp"

namespace lmnl {

namespace {

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
    throw ConfigError("cannot serialise name '" + name + "' (empty or contains whitespace)");
  }
}

void write_list(std::ostream& os, const char* tag, const std::vector<std::string>& names) {
  os << tag << ' ' << names.size();
  for (const auto& n : names) {
    check_name(n);
    os << ' ' << n;
  }
  os << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::istringstream line(const std::string& expected) {
    std::string text;
    while (std::getline(is_, text)) {
      ++number_;
      if (!text.empty() && text.find_first_not_of(" \t\r") != std::string::npos) break;
      text.clear();
    }
    if (text.empty()) fail("unexpected end of file, expected '" + expected + "'");
    std::istringstream ss(text);
    std::string tag;
    ss >> tag;
    if (tag != expected) fail("expected '" + expected + "', found '" + tag + "'");
    return ss;
  }

  std::istringstream raw() {
    std::string text;
    if (!std::getline(is_, text)) fail("unexpected end of file");
    ++number_;
    return std::istringstream(text);
  }

  template <typename T>
  T get(std::istringstream& ss, const char* what) {
    T v{};
    if (!(ss >> v)) fail(std::string("cannot read ") + what);
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError("model file line " + std::to_string(number_) + ": " + msg);
  }

 private:
  std::istream& is_;
  std::size_t number_ = 0;
};

std::vector<std::string> read_list(Reader& r, const char* tag) {
  auto ss = r.line(tag);
  const auto n = r.get<std::size_t>(ss, "count");
  std::vector<std::string> out(n);
  for (auto& s : out) s = r.get<std::string>(ss, "name");
  return out;
}

double read_real(Reader& r, std::istringstream& ss, const char* what) {
  std::string token = r.get<std::string>(ss, what);
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) r.fail(std::string("bad number for ") + what);
    return v;
  } catch (const std::logic_error&) {
    r.fail(std::string("bad number for ") + what + ": '" + token + "'");
  }
}

}  // namespace

void save_model(const HybridChoiceModel& model, std::ostream& os) {
  os << "lmnl-model 1\n";
  os << "kind " << to_string(model.kind) << '\n';
  write_list(os, "alternatives", model.spec.alternatives());
  const auto& names = model.spec.parameters();
  for (std::size_t k = 0; k < names.size(); ++k) {
    check_name(names[k]);
    os << "parameter " << names[k] << ' ' << real(model.beta[static_cast<Eigen::Index>(k)]) << '\n';
  }
  for (const auto& t : model.spec.terms()) {
    if (!t.column.empty()) check_name(t.column);
    os << "term " << names[t.parameter] << ' ' << t.alternative << ' '
       << (t.column.empty() ? "-" : t.column) << '\n';
  }
  write_list(os, "x", model.partition.x);
  write_list(os, "q", model.partition.q);
  const std::size_t n_layers = model.net ? model.net->layers().size() : 0;
  os << "layers " << n_layers << '\n';
  if (model.net) {
    for (const auto& layer : model.net->layers()) {
      os << "layer " << (layer.activation == Activation::ReLU ? "relu" : "identity") << ' '
         << layer.out() << ' ' << layer.in() << '\n';
      for (Eigen::Index r = 0; r < layer.out(); ++r) {
        for (Eigen::Index c = 0; c < layer.in(); ++c) os << (c ? " " : "") << real(layer.weights(r, c));
        os << '\n';
      }
      for (Eigen::Index r = 0; r < layer.out(); ++r) os << (r ? " " : "") << real(layer.biases[r]);
      os << '\n';
    }
  }
  const std::size_t n_nests = model.nests ? model.nests->nests.size() : 0;
  os << "nests " << n_nests << '\n';
  for (std::size_t m = 0; m < n_nests; ++m) {
    const auto& g = model.nests->nests[m];
    os << "nest " << real(model.nests->mu[static_cast<Eigen::Index>(m)]) << ' '
       << (model.nests->fixed[m] ? 1 : 0) << ' ' << g.size();
    for (auto a : g) os << ' ' << a;
    os << '\n';
  }
  os << "end\n";
}

void save_model(const HybridChoiceModel& model, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write model file " + path.string());
  save_model(model, f);
  if (!f) throw Error("error while writing " + path.string());
}

HybridChoiceModel load_model(std::istream& is) {
  Reader r(is);
  {
    auto ss = r.line("lmnl-model");
    if (r.get<int>(ss, "version") != 1) r.fail("unsupported model file version");
  }
  HybridChoiceModel model;
  {
    auto ss = r.line("kind");
    model.kind = parse_model_kind(r.get<std::string>(ss, "kind"));
  }
  UtilitySpec spec(read_list(r, "alternatives"));

  // parameter and term lines until the first other tag
  std::vector<double> beta;
  std::vector<std::string> param_names;
  for (;;) {
    std::streampos pos = is.tellg();
    std::string l;
    if (!std::getline(is, l)) r.fail("unexpected end of file in parameter block");
    std::istringstream ls(l);
    std::string tag;
    ls >> tag;
    if (tag == "parameter") {
      auto name = r.get<std::string>(ls, "parameter name");
      param_names.push_back(name);
      beta.push_back(read_real(r, ls, "parameter value"));
    } else if (tag == "term") {
      auto name = r.get<std::string>(ls, "term parameter");
      UtilityTerm t;
      t.alternative = r.get<std::size_t>(ls, "term alternative");
      t.column = r.get<std::string>(ls, "term column");
      if (t.column == "-") t.column.clear();
      if (std::find(param_names.begin(), param_names.end(), name) == param_names.end()) {
        r.fail("term refers to undeclared parameter '" + name + "'");
      }
      spec.add_term(name, t);
    } else {
      is.clear();
      is.seekg(pos);
      break;
    }
  }
  // order parameters as declared (add_term registers in first-use order)
  UtilitySpec ordered(spec.alternatives());
  for (const auto& name : param_names) {
    for (const auto& t : spec.terms()) {
      if (spec.parameters()[t.parameter] == name) ordered.add_term(name, t);
    }
  }
  if (ordered.parameter_count() != param_names.size()) r.fail("a parameter enters no utility term");
  model.spec = std::move(ordered);
  model.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));

  model.partition.x = read_list(r, "x");
  model.partition.q = read_list(r, "q");

  {
    auto ls = r.line("layers");
    const auto n_layers = r.get<std::size_t>(ls, "layer count");
    if (n_layers > 0) {
      RepresentationNet net;
      std::vector<DenseLayer> layers;
      for (std::size_t k = 0; k < n_layers; ++k) {
        auto hs = r.line("layer");
        DenseLayer layer;
        const auto act = r.get<std::string>(hs, "activation");
        if (act == "relu") {
          layer.activation = Activation::ReLU;
        } else if (act == "identity") {
          layer.activation = Activation::Identity;
        } else {
          r.fail("unknown activation '" + act + "'");
        }
        const auto out = r.get<Eigen::Index>(hs, "rows");
        const auto in = r.get<Eigen::Index>(hs, "cols");
        layer.weights.resize(out, in);
        for (Eigen::Index row = 0; row < out; ++row) {
          auto ws = r.raw();
          for (Eigen::Index c = 0; c < in; ++c) layer.weights(row, c) = read_real(r, ws, "weight");
        }
        layer.biases.resize(out);
        auto bs = r.raw();
        for (Eigen::Index row = 0; row < out; ++row) layer.biases[row] = read_real(r, bs, "bias");
        layers.push_back(std::move(layer));
      }
      for (std::size_t k = 1; k < layers.size(); ++k) {
        if (layers[k].in() != layers[k - 1].out()) r.fail("layer widths do not chain");
      }
      net.layers() = std::move(layers);
      model.net = std::move(net);
    }
  }
  {
    auto ls = r.line("nests");
    const auto n_nests = r.get<std::size_t>(ls, "nest count");
    if (n_nests > 0) {
      NestStructure nests;
      nests.mu.resize(static_cast<Eigen::Index>(n_nests));
      for (std::size_t m = 0; m < n_nests; ++m) {
        auto ns = r.line("nest");
        nests.mu[static_cast<Eigen::Index>(m)] = read_real(r, ns, "nest factor");
        nests.fixed.push_back(r.get<int>(ns, "fixed flag") != 0);
        const auto size = r.get<std::size_t>(ns, "nest size");
        std::vector<std::size_t> g(size);
        for (auto& a : g) a = r.get<std::size_t>(ns, "nest member");
        nests.nests.push_back(std::move(g));
      }
      nests.validate(model.spec.alternatives().size());
      model.nests = std::move(nests);
    }
  }
  r.line("end");

  model.spec.validate();
  if (model.net) {
    if (model.net->input_width() != static_cast<Eigen::Index>(model.partition.q.size())) {
      throw DataError("model file: network input width does not match q");
    }
    if (model.net->output_width() != static_cast<Eigen::Index>(model.spec.alternatives().size())) {
      throw DataError("model file: network output width does not match the choice set");
    }
  }
  return model;
}

HybridChoiceModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open model file " + path.string());
  return load_model(f);
}

}  // namespace lmnl
