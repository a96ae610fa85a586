#include "trace.hpp"

#include <algorithm>
#include <set>

namespace nee {

const char* step_role_name(StepRole role) {
  switch (role) {
    case StepRole::MinSelect: return "min-select";
    case StepRole::ElemMin: return "elem-min";
    case StepRole::Merge: return "merge";
    case StepRole::Add: return "add";
    case StepRole::Multiply: return "multiply";
    case StepRole::Seq2Seq: return "seq2seq";
  }
  return "unknown";
}

DistMode dist_mode_from_string(const std::string& s) {
  if (s == "random") return DistMode::Random;
  if (s == "close") return DistMode::Close;
  if (s == "mixed") return DistMode::Mixed;
  fail(ErrorKind::InvalidArgument, "unknown distribution mode '" + s + "'");
}

std::string dist_mode_name(DistMode m) {
  switch (m) {
    case DistMode::Random: return "random";
    case DistMode::Close: return "close";
    case DistMode::Mixed: return "mixed";
  }
  return "unknown";
}

namespace {

std::vector<uint32_t> sample_close(uint32_t width, uint32_t spread,
                                   size_t length, Rng& rng) {
  const uint32_t maxv = (1u << width) - 1;
  const uint32_t sp = std::min(spread, maxv);
  const uint32_t base = static_cast<uint32_t>(rng.below(maxv - sp + 1));
  std::vector<uint32_t> out(length);
  for (auto& v : out) v = base + static_cast<uint32_t>(rng.below(sp + 1));
  return out;
}

std::vector<uint32_t> sample_random(uint32_t width, size_t length, Rng& rng) {
  const uint64_t range = 1ull << width;
  std::vector<uint32_t> out(length);
  for (auto& v : out) v = static_cast<uint32_t>(rng.below(range));
  return out;
}

}  // namespace

std::vector<uint32_t> sample_sequence(const DistributionSpec& spec,
                                      size_t length, Rng& rng) {
  if (length < 1) fail(ErrorKind::InvalidArgument, "sequence length must be >= 1");
  switch (spec.mode) {
    case DistMode::Random: return sample_random(spec.width, length, rng);
    case DistMode::Close:
      return sample_close(spec.width, spec.close_spread, length, rng);
    case DistMode::Mixed:
      return rng.bernoulli(spec.close_ratio)
                 ? sample_close(spec.width, spec.close_spread, length, rng)
                 : sample_random(spec.width, length, rng);
  }
  fail(ErrorKind::Internal, "unreachable distribution mode");
}

std::vector<uint32_t> sample_sequence(const DistributionSpec& spec,
                                      size_t length, uint64_t seed) {
  Rng rng(seed);
  return sample_sequence(spec, length, rng);
}

// ---------------------------------------------------------------------------

std::vector<TraceStep> gen_selection_sort_trace(const std::vector<uint32_t>& seq) {
  if (seq.empty()) {
    fail(ErrorKind::InvalidArgument, "selection sort trace needs >= 1 element");
  }
  const size_t n = seq.size();
  std::vector<TokenId> tokens(n + 1);
  for (size_t i = 0; i < n; ++i) tokens[i] = static_cast<TokenId>(seq[i]);
  tokens[n] = kEndToken;

  std::vector<TraceStep> steps;
  Mask mask(n + 1, 0);
  for (size_t k = 0; k < n; ++k) {
    size_t best = n;  // the trailing e loses to every number
    for (size_t i = 0; i < n; ++i) {
      if (mask[i]) continue;
      if (best == n || seq[i] < seq[best]) best = i;
    }
    TraceStep st;
    st.tokens = tokens;
    st.mask = mask;
    st.target_value = static_cast<TokenId>(seq[best]);
    st.target_pointer = static_cast<int32_t>(best);
    st.target_next_mask = mask;
    st.target_next_mask[best] = 1;
    st.role = StepRole::MinSelect;
    steps.push_back(st);
    mask[best] = 1;
  }
  TraceStep fin;
  fin.tokens = tokens;
  fin.mask = mask;
  fin.target_value = kEndToken;
  fin.target_pointer = static_cast<int32_t>(n);
  fin.role = StepRole::MinSelect;
  steps.push_back(fin);
  return steps;
}

std::vector<TraceStep> gen_merge_trace(const std::vector<uint32_t>& seq1,
                                       const std::vector<uint32_t>& seq2) {
  if (seq1.empty() || seq2.empty()) {
    fail(ErrorKind::InvalidArgument, "merge trace needs non-empty sequences");
  }
  if (!std::is_sorted(seq1.begin(), seq1.end()) ||
      !std::is_sorted(seq2.begin(), seq2.end())) {
    fail(ErrorKind::InvalidArgument, "merge trace inputs must be sorted");
  }
  const size_t n1 = seq1.size(), n2 = seq2.size();
  const size_t e1 = n1, e2 = n1 + 1 + n2;  // positions of the delimiters
  std::vector<TokenId> tokens;
  tokens.reserve(n1 + n2 + 2);
  for (uint32_t v : seq1) tokens.push_back(static_cast<TokenId>(v));
  tokens.push_back(kEndToken);
  for (uint32_t v : seq2) tokens.push_back(static_cast<TokenId>(v));
  tokens.push_back(kEndToken);

  Mask mask(tokens.size(), 1);
  size_t f1 = 0, f2 = n1 + 1;  // fronts, may come to rest on the delimiters
  mask[f1] = 0;
  mask[f2] = 0;

  std::vector<TraceStep> steps;
  while (f1 != e1 || f2 != e2) {
    const bool pick1 =
        f2 == e2 || (f1 != e1 && seq1[f1] <= seq2[f2 - (n1 + 1)]);
    const size_t chosen = pick1 ? f1 : f2;
    TraceStep st;
    st.tokens = tokens;
    st.mask = mask;
    st.target_value = tokens[chosen];
    st.target_pointer = static_cast<int32_t>(chosen);
    st.target_next_mask = mask;
    st.target_next_mask[chosen] = 1;
    st.target_next_mask[chosen + 1] = 0;
    st.role = StepRole::Merge;
    steps.push_back(st);
    mask = st.target_next_mask;
    if (pick1) {
      ++f1;
    } else {
      ++f2;
    }
  }
  TraceStep fin;
  fin.tokens = tokens;
  fin.mask = mask;
  fin.target_value = kEndToken;
  fin.target_pointer = static_cast<int32_t>(e1);
  fin.role = StepRole::Merge;
  steps.push_back(fin);
  return steps;
}

// ---------------------------------------------------------------------------

std::vector<uint32_t> sample_holdout(uint32_t width, size_t count,
                                     uint64_t seed) {
  const size_t range = static_cast<size_t>(1) << width;
  if (count >= range - 1) {
    fail(ErrorKind::InvalidArgument, "holdout leaves no training numbers");
  }
  std::vector<uint32_t> all;
  all.reserve(range - 1);
  for (size_t v = 1; v < range; ++v) all.push_back(static_cast<uint32_t>(v));
  Rng rng(seed);
  rng.shuffle(all);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

ArithmeticDataset gen_arithmetic_pairs(bool multiply, uint32_t width,
                                       const std::vector<uint32_t>& holdout,
                                       uint64_t seed, size_t max_train_pairs,
                                       size_t eval_pairs) {
  const uint64_t range = 1ull << width;
  std::vector<bool> held(range, false);
  for (uint32_t h : holdout) {
    if (h >= range) fail(ErrorKind::InvalidArgument, "holdout value out of range");
    held[h] = true;
  }
  ArithmeticDataset out;
  out.holdout = holdout;
  std::sort(out.holdout.begin(), out.holdout.end());
  for (uint64_t v = 0; v < range; ++v) {
    if (!held[v]) out.train_numbers.push_back(static_cast<uint32_t>(v));
  }
  if (out.train_numbers.size() < 2) {
    fail(ErrorKind::InvalidArgument, "holdout leaves no training data");
  }

  Rng rng(seed);
  auto pair_ok = [&](uint64_t a, uint64_t b) {
    return multiply || a + b < range;  // addition excludes overflowing pairs
  };
  auto make_step = [&](TokenId a, TokenId b, TokenId target) {
    TraceStep st;
    st.tokens = {a, b};
    st.mask = Mask{0, 0};
    st.target_value = target;
    st.role = multiply ? StepRole::Multiply : StepRole::Add;
    return st;
  };
  auto result_of = [&](TokenId a, TokenId b) -> TokenId {
    if (is_end(a) || is_end(b)) return kEndToken;  // infinity is absorbing
    const uint64_t r = multiply
                           ? static_cast<uint64_t>(a) * static_cast<uint64_t>(b)
                           : static_cast<uint64_t>(a) + static_cast<uint64_t>(b);
    return static_cast<TokenId>(r);
  };

  std::set<std::pair<TokenId, TokenId>> train_keys;
  // Training pairs over trainable numbers only.
  const uint64_t tn = out.train_numbers.size();
  const uint64_t all_pairs = tn * tn;
  if (!multiply && all_pairs <= max_train_pairs * 4) {
    // enumerate and filter, subsample if still too many
    std::vector<std::pair<TokenId, TokenId>> cand;
    for (uint32_t a : out.train_numbers) {
      for (uint32_t b : out.train_numbers) {
        if (pair_ok(a, b)) cand.push_back({static_cast<TokenId>(a),
                                           static_cast<TokenId>(b)});
      }
    }
    rng.shuffle(cand);
    if (cand.size() > max_train_pairs) cand.resize(max_train_pairs);
    for (auto [a, b] : cand) train_keys.insert({a, b});
  } else {
    size_t guard = 0;
    while (train_keys.size() < max_train_pairs &&
           guard < max_train_pairs * 64) {
      ++guard;
      const uint32_t a = out.train_numbers[rng.below(tn)];
      const uint32_t b = out.train_numbers[rng.below(tn)];
      if (pair_ok(a, b)) {
        train_keys.insert({static_cast<TokenId>(a), static_cast<TokenId>(b)});
      }
    }
  }
  if (train_keys.empty()) {
    fail(ErrorKind::InvalidArgument, "no valid training pairs");
  }
  for (auto [a, b] : train_keys) {
    out.train.push_back(make_step(a, b, result_of(a, b)));
  }
  // e-pairs: infinity is absorbing under the operation.
  const size_t n_epairs = std::max<size_t>(8, out.train.size() / 32);
  for (size_t i = 0; i < n_epairs; ++i) {
    const uint32_t x = out.train_numbers[rng.below(tn)];
    out.train.push_back(make_step(kEndToken, static_cast<TokenId>(x), kEndToken));
    out.train.push_back(make_step(static_cast<TokenId>(x), kEndToken, kEndToken));
  }
  out.train.push_back(make_step(kEndToken, kEndToken, kEndToken));
  rng.shuffle(out.train);

  // Evaluation pairs: anywhere in the full range, unseen in training.
  size_t guard = 0;
  std::set<std::pair<TokenId, TokenId>> eval_keys;
  while (eval_keys.size() < eval_pairs && guard < eval_pairs * 200) {
    ++guard;
    const uint64_t a = rng.below(range);
    const uint64_t b = rng.below(range);
    if (!pair_ok(a, b)) continue;
    auto key = std::make_pair(static_cast<TokenId>(a), static_cast<TokenId>(b));
    if (train_keys.count(key)) continue;
    if (eval_keys.insert(key).second) {
      out.eval.push_back(make_step(key.first, key.second,
                                   result_of(key.first, key.second)));
    }
  }
  if (out.eval.size() < eval_pairs) {
    fail(ErrorKind::InvalidArgument,
         "could not assemble enough unseen evaluation pairs");
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

TokenId dist_token(uint64_t d, bool finite) {
  return finite ? static_cast<TokenId>(d) : kEndToken;
}

// Shared skeleton of the Dijkstra/Prim trace generators: an array of cell
// values (distance or key) with a trailing e, a mask that accumulates chosen
// cells, and a min-selection step per iteration.
struct MinSelectState {
  std::vector<uint64_t> value;  // meaningful when finite
  std::vector<bool> finite;
  Mask mask;  // over n+1 positions

  explicit MinSelectState(size_t n)
      : value(n, 0), finite(n, false), mask(n + 1, 0) {}

  std::vector<TokenId> tokens() const {
    std::vector<TokenId> t(value.size() + 1);
    for (size_t i = 0; i < value.size(); ++i) {
      t[i] = dist_token(value[i], finite[i]);
    }
    t[value.size()] = kEndToken;
    return t;
  }

  // Builds the min-selection step. Returns the selected node or -1 when every
  // considered cell is e (the terminal step).
  int emit_min_step(std::vector<TraceStep>& steps) {
    int best = -1;
    for (size_t i = 0; i < value.size(); ++i) {
      if (mask[i] || !finite[i]) continue;
      if (best < 0 || value[i] < value[static_cast<size_t>(best)]) {
        best = static_cast<int>(i);
      }
    }
    TraceStep st;
    st.tokens = tokens();
    st.mask = mask;
    st.role = StepRole::MinSelect;
    if (best >= 0) {
      st.target_value = dist_token(value[static_cast<size_t>(best)], true);
      st.target_pointer = best;
      st.target_next_mask = mask;
      st.target_next_mask[static_cast<size_t>(best)] = 1;
      steps.push_back(st);
      mask[static_cast<size_t>(best)] = 1;
      return best;
    }
    // terminal: the min of what remains is e; point at the first considered e
    st.target_value = kEndToken;
    size_t ptr = value.size();  // trailing delimiter by default
    for (size_t i = 0; i < value.size(); ++i) {
      if (!st.mask[i]) {
        ptr = i;
        break;
      }
    }
    st.target_pointer = static_cast<int32_t>(ptr);
    steps.push_back(st);
    return -1;
  }
};

TraceStep elem_min_step(TokenId current, TokenId candidate) {
  TraceStep st;
  st.tokens = {current, candidate, kEndToken};
  st.mask = Mask{0, 0, 0};
  st.role = StepRole::ElemMin;
  const bool cur_inf = is_end(current), cand_inf = is_end(candidate);
  bool keep_current;
  if (cur_inf && cand_inf) {
    keep_current = true;
  } else if (cur_inf) {
    keep_current = false;
  } else if (cand_inf) {
    keep_current = true;
  } else {
    keep_current = current <= candidate;
  }
  st.target_value = keep_current ? current : candidate;
  st.target_pointer = keep_current ? 0 : 1;
  return st;
}

}  // namespace

std::vector<TraceGroup> gen_dijkstra_trace(const WeightedGraph& g, int source) {
  g.validate();
  if (source < 0 || source >= g.n) {
    fail(ErrorKind::InvalidArgument, "dijkstra: source out of range");
  }
  auto adj = g.adjacency();
  MinSelectState state(static_cast<size_t>(g.n));
  state.finite[static_cast<size_t>(source)] = true;  // dist[source] = 0

  std::vector<TraceGroup> groups;
  while (true) {
    TraceGroup select{StepRole::MinSelect, {}};
    int u = state.emit_min_step(select.steps);
    groups.push_back(std::move(select));
    if (u < 0) break;  // remaining nodes unreachable (or none left)

    TraceGroup adds{StepRole::Add, {}};
    TraceGroup mins{StepRole::ElemMin, {}};
    const uint64_t du = state.value[static_cast<size_t>(u)];
    for (auto [v, w] : adj[static_cast<size_t>(u)]) {
      if (state.mask[static_cast<size_t>(v)]) continue;  // already settled
      const uint64_t possible = du + w;
      TraceStep add;
      add.tokens = {dist_token(du, true), static_cast<TokenId>(w)};
      add.mask = Mask{0, 0};
      add.target_value = static_cast<TokenId>(possible);
      add.role = StepRole::Add;
      adds.steps.push_back(add);

      const TokenId cur =
          dist_token(state.value[static_cast<size_t>(v)],
                     state.finite[static_cast<size_t>(v)]);
      TraceStep em = elem_min_step(cur, static_cast<TokenId>(possible));
      mins.steps.push_back(em);
      if (em.target_pointer == 1) {
        state.value[static_cast<size_t>(v)] = possible;
        state.finite[static_cast<size_t>(v)] = true;
      }
    }
    if (!adds.steps.empty()) groups.push_back(std::move(adds));
    if (!mins.steps.empty()) groups.push_back(std::move(mins));
  }
  return groups;
}

std::vector<TraceGroup> gen_prim_trace(const WeightedGraph& g, int root) {
  g.validate();
  if (root < 0 || root >= g.n) {
    fail(ErrorKind::InvalidArgument, "prim: root out of range");
  }
  if (!g.connected()) {
    fail(ErrorKind::InvalidArgument, "prim requires a connected graph");
  }
  auto adj = g.adjacency();
  MinSelectState state(static_cast<size_t>(g.n));
  state.finite[static_cast<size_t>(root)] = true;  // key[root] = 0

  std::vector<TraceGroup> groups;
  while (true) {
    TraceGroup select{StepRole::MinSelect, {}};
    int u = state.emit_min_step(select.steps);
    groups.push_back(std::move(select));
    if (u < 0) break;

    TraceGroup mins{StepRole::ElemMin, {}};
    for (auto [v, w] : adj[static_cast<size_t>(u)]) {
      if (state.mask[static_cast<size_t>(v)]) continue;
      const TokenId cur =
          dist_token(state.value[static_cast<size_t>(v)],
                     state.finite[static_cast<size_t>(v)]);
      TraceStep em = elem_min_step(cur, static_cast<TokenId>(w));
      mins.steps.push_back(em);
      if (em.target_pointer == 1) {
        state.value[static_cast<size_t>(v)] = w;
        state.finite[static_cast<size_t>(v)] = true;
      }
    }
    if (!mins.steps.empty()) groups.push_back(std::move(mins));
  }
  return groups;
}

}  // namespace nee
