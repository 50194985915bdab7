#pragma once

// Functional victim models: two adder clusters feeding priority encoders, and
// two AES-128 instances. Each reads the fabric's corruption set and reports a
// fault-localization register (flt_sig).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "flare/aes.hpp"
#include "flare/fabric.hpp"

namespace flare {

inline constexpr std::uint32_t kFieldMask = 0x3FFu;

struct FltSig {
  std::uint32_t value = 0;

  constexpr std::uint32_t cluster1() const noexcept { return value & kFieldMask; }
  constexpr std::uint32_t cluster2() const noexcept { return (value >> 10) & kFieldMask; }
  friend constexpr bool operator==(const FltSig&, const FltSig&) = default;
};

/// 0 when no flag is set, otherwise the lowest set index plus one.
inline std::uint32_t priority_encode(const std::vector<bool>& flags) {
  if (flags.size() > kFieldMask) throw std::invalid_argument("priority encoder supports at most 1023 inputs");
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i]) return static_cast<std::uint32_t>(i + 1);
  return 0;
}

// ---------------------------------------------------------------------------
// Adder clusters

struct AdderLayout {
  std::size_t n = 500;
  std::uint8_t cluster1_prr = 0;
  std::uint32_t cluster1_first_frame = 0;
  std::uint8_t cluster2_prr = 3;
  std::uint32_t cluster2_first_frame = 0;
  std::uint32_t frames_per_adder = 1;
  std::uint8_t encoder1_prr = 5;
  std::uint32_t encoder1_first_frame = 0;
  std::uint8_t encoder2_prr = 5;
  std::uint32_t encoder2_first_frame = 2;
  std::uint32_t frames_per_encoder = 2;
};

class AdderScenario {
 public:
  using Operands = std::pair<std::uint16_t, std::uint16_t>;

  explicit AdderScenario(const AdderLayout& layout) : n_(layout.n) {
    if (n_ == 0 || n_ > kFieldMask) throw std::invalid_argument("adder count must be in 1..1023");
    if (layout.frames_per_adder == 0 || layout.frames_per_encoder == 0)
      throw std::invalid_argument("units need at least one frame");
    inputs_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i)
      inputs_.emplace_back(static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(2 * i + 1));

    auto place_cluster = [&](int c, std::uint8_t prr, std::uint32_t first, std::vector<Placement>& out) {
      for (std::size_t i = 0; i < n_; ++i) {
        const auto f = static_cast<std::uint32_t>(first + i * layout.frames_per_adder);
        out.push_back({adder_id(c, i), prr, f, f + layout.frames_per_adder - 1});
      }
    };
    place_cluster(1, layout.cluster1_prr, layout.cluster1_first_frame, cluster1_);
    place_cluster(2, layout.cluster2_prr, layout.cluster2_first_frame, cluster2_);
    encoder1_ = {"p1", layout.encoder1_prr, layout.encoder1_first_frame,
                 layout.encoder1_first_frame + layout.frames_per_encoder - 1};
    encoder2_ = {"p2", layout.encoder2_prr, layout.encoder2_first_frame,
                 layout.encoder2_first_frame + layout.frames_per_encoder - 1};

    all_ = cluster1_;
    all_.insert(all_.end(), cluster2_.begin(), cluster2_.end());
    all_.push_back(encoder1_);
    all_.push_back(encoder2_);
    for (std::size_t i = 0; i < n_; ++i) {
      roles_.emplace(cluster1_[i].unit_id, Role{1, i});
      roles_.emplace(cluster2_[i].unit_id, Role{2, i});
    }
    roles_.emplace("p1", Role{-1, 0});
    roles_.emplace("p2", Role{-2, 0});
  }

  static std::string adder_id(int cluster, std::size_t index) {
    return "adder" + std::to_string(cluster) + "_" + std::to_string(index);
  }

  std::size_t n() const noexcept { return n_; }
  const std::vector<Operands>& inputs() const noexcept { return inputs_; }
  const std::vector<Placement>& cluster(int c) const { return c == 1 ? cluster1_ : cluster2_; }
  const Placement& encoder(int c) const { return c == 1 ? encoder1_ : encoder2_; }
  std::span<const Placement> placements() const noexcept { return all_; }

  std::uint16_t expected_sum(std::size_t i) const noexcept {
    return static_cast<std::uint16_t>(inputs_[i].first + inputs_[i].second);
  }

  struct Role {
    int cluster;  // 1, 2 for adders; -1, -2 for encoders p1, p2
    std::size_t index;
  };
  const Role* role(const std::string& unit_id) const {
    auto it = roles_.find(unit_id);
    return it == roles_.end() ? nullptr : &it->second;
  }

 private:
  std::size_t n_;
  std::vector<Operands> inputs_;
  std::vector<Placement> cluster1_, cluster2_;
  Placement encoder1_, encoder2_;
  std::vector<Placement> all_;
  std::unordered_map<std::string, Role> roles_;
};

struct AdderEvaluation {
  std::vector<std::uint16_t> out1, out2;
  std::vector<bool> flag1, flag2;
  FltSig flt_sig;
};

inline AdderEvaluation evaluate_adders(const AdderScenario& sc, const CorruptedUnits& corrupted) {
  const std::size_t n = sc.n();
  AdderEvaluation ev;
  ev.out1.resize(n);
  ev.out2.resize(n);
  for (std::size_t i = 0; i < n; ++i) ev.out1[i] = ev.out2[i] = sc.expected_sum(i);

  std::uint32_t enc_delta[2] = {0, 0};
  for (const auto& [unit, digest] : corrupted) {
    const auto* r = sc.role(unit);
    if (!r) continue;
    if (r->cluster == 1) ev.out1[r->index] ^= static_cast<std::uint16_t>(digest);
    else if (r->cluster == 2) ev.out2[r->index] ^= static_cast<std::uint16_t>(digest);
    else enc_delta[-r->cluster - 1] = digest;
  }

  ev.flag1.resize(n);
  ev.flag2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ev.flag1[i] = ev.out1[i] != sc.expected_sum(i);
    ev.flag2[i] = ev.out2[i] != sc.expected_sum(i);
  }
  const std::uint32_t p1 = (priority_encode(ev.flag1) ^ enc_delta[0]) & kFieldMask;
  const std::uint32_t p2 = (priority_encode(ev.flag2) ^ enc_delta[1]) & kFieldMask;
  ev.flt_sig.value = p1 | (p2 << 10);
  return ev;
}

// ---------------------------------------------------------------------------
// AES instances

struct AesLayout {
  aes::Key128 key{};
  aes::Block plaintext{};
  Placement aes1{"aes1", 0, 0, 63};
  Placement aes2{"aes2", 6, 0, 63};
};

/// FIPS-197 appendix C.1 vector; its ciphertext is independently published.
inline AesLayout default_aes_layout() {
  AesLayout l;
  l.key = *aes::block_from_hex("000102030405060708090a0b0c0d0e0f");
  l.plaintext = *aes::block_from_hex("00112233445566778899aabbccddeeff");
  return l;
}

class AesScenario {
 public:
  explicit AesScenario(const AesLayout& layout)
      : key_(layout.key),
        plaintext_(layout.plaintext),
        expected_(aes::encrypt(layout.key, layout.plaintext)),
        placements_{layout.aes1, layout.aes2} {
    placements_[0].unit_id = "aes1";
    placements_[1].unit_id = "aes2";
  }

  const aes::Key128& key() const noexcept { return key_; }
  const aes::Block& plaintext() const noexcept { return plaintext_; }
  const aes::Block& expected_ct() const noexcept { return expected_; }
  const Placement& instance(int k) const { return placements_.at(static_cast<std::size_t>(k - 1)); }
  std::span<const Placement> placements() const noexcept { return placements_; }

 private:
  aes::Key128 key_;
  aes::Block plaintext_;
  aes::Block expected_;
  std::vector<Placement> placements_;
};

struct AesEvaluation {
  aes::Block ct1{}, ct2{};
  bool flag1 = false, flag2 = false;
  FltSig flt_sig;
};

inline AesEvaluation evaluate_aes(const AesScenario& sc, const CorruptedUnits& corrupted) {
  // A corrupted instance's output is the golden ciphertext with the digest
  // XORed into its last four bytes.
  auto output = [&](const Placement& p) {
    aes::Block ct = sc.expected_ct();
    if (auto it = corrupted.find(p.unit_id); it != corrupted.end())
      for (int i = 0; i < 4; ++i) ct[15 - i] ^= static_cast<std::uint8_t>(it->second >> (8 * i));
    return ct;
  };
  AesEvaluation ev;
  ev.ct1 = output(sc.instance(1));
  ev.ct2 = output(sc.instance(2));
  ev.flag1 = ev.ct1 != sc.expected_ct();
  ev.flag2 = ev.ct2 != sc.expected_ct();
  ev.flt_sig.value = (ev.flag1 ? 1u : 0u) | (ev.flag2 ? 2u : 0u);
  return ev;
}

// ---------------------------------------------------------------------------

using VictimScenario = std::variant<AdderScenario, AesScenario>;

inline std::span<const Placement> victim_placements(const VictimScenario& v) {
  return std::visit([](const auto& s) { return s.placements(); }, v);
}

inline FltSig evaluate_victims(const VictimScenario& v, const CorruptedUnits& corrupted) {
  if (const auto* adders = std::get_if<AdderScenario>(&v)) return evaluate_adders(*adders, corrupted).flt_sig;
  return evaluate_aes(std::get<AesScenario>(v), corrupted).flt_sig;
}

}  // namespace flare
