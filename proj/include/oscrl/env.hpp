#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oscrl {

using Token = int;

// Fixed 14-token vocabulary. Indices are a serialization contract and must
// never be reordered.
namespace vocab {
inline constexpr Token kNext = 0;
inline constexpr Token kWait = 1;
inline constexpr Token kAnsBase = 2;  // ANS_0..ANS_9 occupy 2..11
inline constexpr Token kEos = 12;
inline constexpr Token kPad = 13;
inline constexpr int kSize = 14;

inline constexpr bool is_valid(Token t) { return t >= 0 && t < kSize; }
inline constexpr bool is_ans(Token t) { return t >= kAnsBase && t < kAnsBase + 10; }
inline constexpr Token ans(int digit) { return kAnsBase + digit; }
inline constexpr int ans_digit(Token t) { return t - kAnsBase; }

std::string name(Token t);
std::optional<Token> from_name(const std::string& name);
}  // namespace vocab

// One chain-sum task: the target is the digit sum mod 10.
struct Question {
  std::vector<int> digits;
  int answer = 0;

  bool operator==(const Question&) const = default;
};

// Deterministic scratchpad automaton threaded through a rollout. NEXT
// consumes one question digit into the mod-10 accumulator; every other token
// only updates last_token.
struct ScratchState {
  int acc = 0;        // mod-10 sum of consumed digits
  int remaining = 0;  // digits not yet consumed
  Token last_token = vocab::kPad;

  bool operator==(const ScratchState&) const = default;
};

// A sampled token sequence with its rollout-time log-probabilities.
struct Response {
  std::vector<Token> tokens;
  std::vector<double> logprobs;
  bool truncated = false;  // hit the cap before EOS

  bool operator==(const Response&) const = default;
};

// Deterministic given (seed, n, k range); digits uniform in [0,9], length
// uniform in [k_min, k_max].
std::vector<Question> gen_dataset(uint64_t seed, int n, int k_min, int k_max);

ScratchState initial_state(const Question& q);
ScratchState step_state(const ScratchState& s, const Question& q, Token token);

// one-hot(acc) ++ one-hot(min(remaining, k_max)) ++ one-hot(last_token) ++ 1
inline constexpr int feature_dim(int k_max) { return 10 + (k_max + 1) + vocab::kSize + 1; }
std::vector<double> features(const ScratchState& s, int k_max);

// Digit of the last ANS token, if any.
std::optional<int> extract_answer(std::span<const Token> tokens);

// 1 iff the extracted answer equals the question's answer.
int verify(const Question& q, std::span<const Token> tokens);

// Line-delimited records: {"digits":[...],"answer":n}
void save_dataset(const std::vector<Question>& questions,
                  const std::filesystem::path& path);
std::vector<Question> load_dataset(const std::filesystem::path& path);

}  // namespace oscrl
