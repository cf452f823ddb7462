#include "oscrl/env.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "oscrl/rng.hpp"

namespace oscrl {

namespace vocab {

std::string name(Token t) {
  if (t == kNext) return "NEXT";
  if (t == kWait) return "WAIT";
  if (is_ans(t)) return "ANS_" + std::to_string(ans_digit(t));
  if (t == kEos) return "EOS";
  if (t == kPad) return "PAD";
  throw std::invalid_argument("invalid token index: " + std::to_string(t));
}

std::optional<Token> from_name(const std::string& name) {
  if (name == "NEXT") return kNext;
  if (name == "WAIT") return kWait;
  if (name == "EOS") return kEos;
  if (name == "PAD") return kPad;
  if (name.size() == 5 && name.rfind("ANS_", 0) == 0 && name[4] >= '0' && name[4] <= '9')
    return ans(name[4] - '0');
  return std::nullopt;
}

}  // namespace vocab

std::vector<Question> gen_dataset(uint64_t seed, int n, int k_min, int k_max) {
  if (k_min < 1 || k_min > k_max)
    throw std::invalid_argument("gen_dataset: need 1 <= k_min <= k_max");
  if (n < 0) throw std::invalid_argument("gen_dataset: n must be >= 0");
  std::vector<Question> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {static_cast<uint64_t>(i)}));
    Question q;
    const int k = rng.uniform_int(k_min, k_max);
    q.digits.reserve(static_cast<std::size_t>(k));
    int sum = 0;
    for (int j = 0; j < k; ++j) {
      const int d = rng.uniform_int(0, 9);
      q.digits.push_back(d);
      sum += d;
    }
    q.answer = sum % 10;
    out.push_back(std::move(q));
  }
  return out;
}

ScratchState initial_state(const Question& q) {
  return ScratchState{0, static_cast<int>(q.digits.size()), vocab::kPad};
}

ScratchState step_state(const ScratchState& s, const Question& q, Token token) {
  if (!vocab::is_valid(token))
    throw std::invalid_argument("step_state: invalid token " + std::to_string(token));
  ScratchState next = s;
  if (token == vocab::kNext && s.remaining > 0) {
    const int idx = static_cast<int>(q.digits.size()) - s.remaining;
    next.acc = (s.acc + q.digits[static_cast<std::size_t>(idx)]) % 10;
    next.remaining = s.remaining - 1;
  }
  next.last_token = token;
  return next;
}

std::vector<double> features(const ScratchState& s, int k_max) {
  std::vector<double> f(static_cast<std::size_t>(feature_dim(k_max)), 0.0);
  f[static_cast<std::size_t>(s.acc)] = 1.0;
  f[static_cast<std::size_t>(10 + std::min(s.remaining, k_max))] = 1.0;
  f[static_cast<std::size_t>(10 + (k_max + 1) + s.last_token)] = 1.0;
  f.back() = 1.0;  // bias
  return f;
}

std::optional<int> extract_answer(std::span<const Token> tokens) {
  for (auto it = tokens.rbegin(); it != tokens.rend(); ++it)
    if (vocab::is_ans(*it)) return vocab::ans_digit(*it);
  return std::nullopt;
}

int verify(const Question& q, std::span<const Token> tokens) {
  const auto ans = extract_answer(tokens);
  return ans.has_value() && *ans == q.answer ? 1 : 0;
}

void save_dataset(const std::vector<Question>& questions,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& q : questions) {
    nlohmann::ordered_json j;
    j["digits"] = q.digits;
    j["answer"] = q.answer;
    out << j.dump() << '\n';
  }
}

std::vector<Question> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());
  std::vector<Question> questions;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Question q;
    q.digits = j.at("digits").get<std::vector<int>>();
    q.answer = j.at("answer").get<int>();
    questions.push_back(std::move(q));
  }
  return questions;
}

}  // namespace oscrl
