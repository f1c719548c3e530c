#include "pih/net.hpp"

namespace pih::net {

namespace detail {

namespace {
constexpr char kB64[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string b64_encode(const unsigned char* data, size_t n) {
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  for (size_t i = 0; i < n; i += 3) {
    unsigned v = data[i] << 16;
    if (i + 1 < n) v |= data[i + 1] << 8;
    if (i + 2 < n) v |= data[i + 2];
    out.push_back(kB64[(v >> 18) & 63]);
    out.push_back(kB64[(v >> 12) & 63]);
    out.push_back(i + 1 < n ? kB64[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < n ? kB64[v & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> b64_decode(const std::string& s) {
  if (s.size() % 4 != 0) throw std::invalid_argument("bad base64 length");
  int rev[256];
  std::fill(std::begin(rev), std::end(rev), -1);
  for (int i = 0; i < 64; ++i) rev[static_cast<unsigned char>(kB64[i])] = i;
  std::vector<unsigned char> out;
  out.reserve(s.size() / 4 * 3);
  for (size_t i = 0; i < s.size(); i += 4) {
    unsigned v = 0;
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = s[i + j];
      if (c == '=') {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = rev[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw std::invalid_argument("bad base64 input");
      v = (v << 6) | static_cast<unsigned>(d);
    }
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 0xff));
  }
  return out;
}

}  // namespace detail

nlohmann::ordered_json spec_to_json(const NetSpec& s) {
  nlohmann::ordered_json j;
  j["obs_dim"] = s.obs_dim;
  j["act_dim"] = s.act_dim;
  j["obs_embed"] = s.obs_embed;
  j["act_embed"] = s.act_embed;
  j["rnn_hidden"] = s.rnn_hidden;
  j["mlp_hidden"] = s.mlp_hidden;
  j["nonlin"] = s.nonlin == Nonlin::tanh_fn ? "tanh" : "relu";
  j["log_std_min"] = s.log_std_min;
  j["log_std_max"] = s.log_std_max;
  j["recurrent"] = s.recurrent;
  return j;
}

NetSpec spec_from_json(const nlohmann::ordered_json& j) {
  NetSpec s;
  s.obs_dim = j.at("obs_dim").get<int>();
  s.act_dim = j.at("act_dim").get<int>();
  s.obs_embed = j.at("obs_embed").get<int>();
  s.act_embed = j.at("act_embed").get<int>();
  s.rnn_hidden = j.at("rnn_hidden").get<int>();
  s.mlp_hidden = j.at("mlp_hidden").get<std::vector<int>>();
  const auto nl = j.at("nonlin").get<std::string>();
  if (nl == "tanh")
    s.nonlin = Nonlin::tanh_fn;
  else if (nl == "relu")
    s.nonlin = Nonlin::relu_fn;
  else
    throw std::invalid_argument("unknown nonlinearity " + nl);
  s.log_std_min = j.at("log_std_min").get<double>();
  s.log_std_max = j.at("log_std_max").get<double>();
  s.recurrent = j.at("recurrent").get<bool>();
  s.validate();
  return s;
}

bool spec_equal(const NetSpec& a, const NetSpec& b) {
  return spec_to_json(a) == spec_to_json(b);
}

namespace {

template <typename T>
nlohmann::ordered_json blob(const std::vector<T>& v) {
  return detail::b64_encode(reinterpret_cast<const unsigned char*>(v.data()),
                            v.size() * sizeof(T));
}

template <typename T>
void unblob(const nlohmann::ordered_json& j, std::vector<T>& v) {
  const auto bytes = detail::b64_decode(j.get<std::string>());
  if (bytes.size() != v.size() * sizeof(T))
    throw std::invalid_argument("checkpoint blob size mismatch");
  std::memcpy(v.data(), bytes.data(), bytes.size());
}

}  // namespace

template <typename T>
nlohmann::ordered_json store_to_json(const ParamStore<T>& ps) {
  nlohmann::ordered_json j;
  j["scalar"] = sizeof(T) == 8 ? "f64" : "f32";
  j["opt_steps"] = ps.opt_steps();
  nlohmann::ordered_json names = nlohmann::ordered_json::array();
  for (const auto& s : ps.slices()) {
    nlohmann::ordered_json e;
    e["name"] = s.name;
    e["rows"] = s.rows;
    e["cols"] = s.cols;
    names.push_back(e);
  }
  j["slices"] = names;
  j["params"] = blob(ps.params());
  auto& mut = const_cast<ParamStore<T>&>(ps);
  j["adam_m"] = blob(mut.adam_m());
  j["adam_v"] = blob(mut.adam_v());
  return j;
}

template <typename T>
void store_from_json(ParamStore<T>& ps, const nlohmann::ordered_json& j) {
  const auto scalar = j.at("scalar").get<std::string>();
  if (scalar != (sizeof(T) == 8 ? "f64" : "f32"))
    throw std::invalid_argument("checkpoint scalar type mismatch");
  const auto& names = j.at("slices");
  if (names.size() != ps.slices().size())
    throw std::invalid_argument("checkpoint slice count mismatch");
  for (size_t i = 0; i < names.size(); ++i) {
    const auto& e = names[i];
    const auto& s = ps.slices()[i];
    if (e.at("name").get<std::string>() != s.name ||
        e.at("rows").get<int>() != s.rows || e.at("cols").get<int>() != s.cols)
      throw std::invalid_argument("checkpoint slice mismatch at " + s.name);
  }
  unblob(j.at("params"), ps.params());
  unblob(j.at("adam_m"), ps.adam_m());
  unblob(j.at("adam_v"), ps.adam_v());
  ps.set_opt_steps(j.at("opt_steps").get<int>());
}

template nlohmann::ordered_json store_to_json<float>(const ParamStore<float>&);
template nlohmann::ordered_json store_to_json<double>(
    const ParamStore<double>&);
template void store_from_json<float>(ParamStore<float>&,
                                     const nlohmann::ordered_json&);
template void store_from_json<double>(ParamStore<double>&,
                                      const nlohmann::ordered_json&);

template class ParamStore<float>;
template class ParamStore<double>;
template class Linear<float>;
template class Linear<double>;
template class Activation<float>;
template class Activation<double>;
template class Mlp<float>;
template class Mlp<double>;
template class Gru<float>;
template class Gru<double>;
template class HistoryEncoder<float>;
template class HistoryEncoder<double>;
template class PolicyHead<float>;
template class PolicyHead<double>;
template class QHead<float>;
template class QHead<double>;

}  // namespace pih::net
