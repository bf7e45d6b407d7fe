#include "supconv/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace supconv {

namespace {

std::string hex_encode(const double* data, int n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(size_t(n) * 16);
  for (int i = 0; i < n; ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(data[i]);
    for (int k = 15; k >= 0; --k) out.push_back(digits[(bits >> (4 * k)) & 0xF]);
  }
  return out;
}

std::vector<double> hex_decode(const std::string& s, int expected) {
  if (s.size() != size_t(expected) * 16) throw std::invalid_argument("hex field has wrong length");
  std::vector<double> out(static_cast<size_t>(expected));
  for (int i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 16; ++k) {
      char c = s[size_t(i) * 16 + size_t(k)];
      int v;
      if (c >= '0' && c <= '9') v = c - '0';
      else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
      else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
      else throw std::invalid_argument("bad hex digit in weight payload");
      bits = (bits << 4) | std::uint64_t(v);
    }
    out[size_t(i)] = std::bit_cast<double>(bits);
    if (!std::isfinite(out[size_t(i)])) throw std::invalid_argument("non-finite weight in payload");
  }
  return out;
}

}  // namespace

std::string serialize_network(const Network& net) {
  net.validate();
  nlohmann::json j;
  j["activation"] = {{"name", net.activation_name()}, {"params", net.activation().params}};
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    // row-major weight payload
    std::vector<double> w(size_t(l.W.size()));
    for (int r = 0; r < l.W.rows(); ++r)
      for (int c = 0; c < l.W.cols(); ++c) w[size_t(r) * size_t(l.W.cols()) + size_t(c)] = l.W(r, c);
    layers.push_back({{"rows", l.W.rows()},
                      {"cols", l.W.cols()},
                      {"weights_hex", hex_encode(w.data(), int(w.size()))},
                      {"bias_hex", hex_encode(l.b.data(), int(l.b.size()))}});
  }
  j["layers"] = std::move(layers);
  nlohmann::json skips = nlohmann::json::array();
  for (const auto& m : net.skip_mask) {
    nlohmann::json rows = nlohmann::json::array();
    for (size_t r = 0; r < m.size(); ++r)
      if (m[r]) rows.push_back(int(r));
    skips.push_back(std::move(rows));
  }
  j["skip_channels"] = std::move(skips);
  j["provenance"] = net.provenance;
  j["declared_width"] = net.declared_width;
  j["declared_depth"] = net.declared_depth;
  j["input_kinks"] = net.input_kinks;
  return j.dump(2);
}

Network deserialize_network(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Network net;
  std::string act_name = j.at("activation").at("name").get<std::string>();
  if (!act_name.empty()) {
    if (!activation_exists(act_name))
      throw std::invalid_argument("deserialize: unknown activation " + act_name);
    Activation a = find_activation(act_name);
    if (j["activation"].contains("params"))
      for (auto& [k, v] : j["activation"]["params"].items()) a.params[k] = v.get<double>();
    net.set_activation(a);
  }
  if (!j.contains("layers") || j["layers"].empty())
    throw std::invalid_argument("deserialize: empty layer list");
  for (const auto& jl : j["layers"]) {
    int rows = jl.at("rows").get<int>(), cols = jl.at("cols").get<int>();
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("deserialize: bad layer shape");
    auto w = hex_decode(jl.at("weights_hex").get<std::string>(), rows * cols);
    auto b = hex_decode(jl.at("bias_hex").get<std::string>(), rows);
    AffineLayer l;
    l.W.resize(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) l.W(r, c) = w[size_t(r) * size_t(cols) + size_t(c)];
    l.b = Eigen::Map<Eigen::VectorXd>(b.data(), rows);
    net.layers.push_back(std::move(l));
  }
  net.skip_mask.resize(size_t(net.hidden_layers()));
  for (int i = 0; i < net.hidden_layers(); ++i)
    net.skip_mask[size_t(i)].assign(size_t(net.layers[size_t(i)].W.rows()), 0);
  if (j.contains("skip_channels")) {
    auto sc = j["skip_channels"];
    if (int(sc.size()) != net.hidden_layers())
      throw std::invalid_argument("deserialize: skip_channels size mismatch");
    for (int i = 0; i < net.hidden_layers(); ++i)
      for (const auto& r : sc[size_t(i)]) {
        int row = r.get<int>();
        if (row < 0 || row >= int(net.skip_mask[size_t(i)].size()))
          throw std::invalid_argument("deserialize: skip row out of range");
        net.skip_mask[size_t(i)][size_t(row)] = 1;
      }
  }
  if (j.contains("provenance")) net.provenance = j["provenance"];
  net.declared_width = j.value("declared_width", net.max_hidden_width());
  net.declared_depth = j.value("declared_depth", net.hidden_layers());
  if (j.contains("input_kinks")) net.input_kinks = j["input_kinks"].get<std::vector<double>>();
  net.validate();
  return net;
}

void save_network(const Network& net, const std::string& path) {
  std::string text = serialize_network(net);
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp);
    f << text;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

Network load_network(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_network(ss.str());
}

}  // namespace supconv
