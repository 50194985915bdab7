#include <random>

#include <gtest/gtest.h>
#include <openssl/evp.h>

#include "flare/fabric.hpp"
#include "flare/victims.hpp"

namespace {

using namespace flare;

// OpenSSL as the independent AES-128 reference.
aes::Block openssl_encrypt(const aes::Key128& key, const aes::Block& pt) {
  aes::Block ct{};
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  int len = 0;
  EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, key.data(), nullptr);
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  EVP_EncryptUpdate(ctx, ct.data(), &len, pt.data(), static_cast<int>(pt.size()));
  EVP_CIPHER_CTX_free(ctx);
  return ct;
}

aes::Block hex(std::string_view s) { return *aes::block_from_hex(s); }

TEST(Aes, FipsAppendixVector) {
  const auto key = hex("000102030405060708090a0b0c0d0e0f");
  const auto pt = hex("00112233445566778899aabbccddeeff");
  EXPECT_EQ(aes::to_hex(aes::encrypt(key, pt)), "69c4e0d86a7b0430d8cdb78070b4c55a");
  EXPECT_EQ(aes::encrypt(key, pt), openssl_encrypt(key, pt));
  EXPECT_EQ(aes::encrypt(key, pt), aes::encrypt(key, pt));
}

TEST(Aes, EcbKnownAnswer) {
  const auto key = hex("2b7e151628aed2a6abf7158809cf4f3c");
  const auto pt = hex("6bc1bee22e409f96e93d7e117393172a");
  EXPECT_EQ(aes::to_hex(aes::encrypt(key, pt)), "3ad77bb40d7a3660a89ecaf32466ef97");
  EXPECT_EQ(aes::encrypt(key, pt), openssl_encrypt(key, pt));
}

TEST(Aes, MatchesOpenSslOnRandomBlocks) {
  std::mt19937 rng(17);
  for (int i = 0; i < 500; ++i) {
    aes::Key128 key;
    aes::Block pt;
    for (auto& b : key) b = static_cast<std::uint8_t>(rng());
    for (auto& b : pt) b = static_cast<std::uint8_t>(rng());
    ASSERT_EQ(aes::encrypt(key, pt), openssl_encrypt(key, pt));
  }
}

TEST(Aes, HexParsing) {
  EXPECT_FALSE(aes::block_from_hex("00"));
  EXPECT_FALSE(aes::block_from_hex("zz0102030405060708090a0b0c0d0e0f"));
  EXPECT_TRUE(aes::block_from_hex("000102030405060708090A0B0C0D0E0F"));
}

TEST(PriorityEncoder, Examples) {
  std::vector<bool> f(500, false);
  EXPECT_EQ(priority_encode(f), 0u);
  f[3] = true;
  EXPECT_EQ(priority_encode(f), 4u);
  std::fill(f.begin(), f.end(), false);
  f[2] = f[7] = true;
  EXPECT_EQ(priority_encode(f), 3u);
  EXPECT_EQ(priority_encode(std::vector<bool>(1023, true)), 1u);
  EXPECT_THROW(priority_encode(std::vector<bool>(1024)), std::invalid_argument);
}

TEST(Adders, DefaultLayout) {
  const AdderScenario sc{AdderLayout{}};
  EXPECT_EQ(sc.n(), 500u);
  EXPECT_EQ(sc.placements().size(), 1002u);
  EXPECT_EQ(sc.inputs()[7], (AdderScenario::Operands{7, 15}));
  EXPECT_EQ(sc.expected_sum(7), 22);
  EXPECT_EQ(sc.cluster(1)[7].unit_id, "adder1_7");
  EXPECT_EQ(sc.cluster(2)[499].prr_id, 3);
  EXPECT_EQ(sc.encoder(1).unit_id, "p1");
}

TEST(Adders, FaultFree) {
  const AdderScenario sc{AdderLayout{}};
  const auto ev = evaluate_adders(sc, {});
  EXPECT_EQ(ev.flt_sig.value, 0u);
  EXPECT_EQ(std::count(ev.flag1.begin(), ev.flag1.end(), true), 0);
  EXPECT_EQ(std::count(ev.flag2.begin(), ev.flag2.end(), true), 0);
  for (std::size_t i = 0; i < sc.n(); ++i) EXPECT_EQ(ev.out1[i], sc.expected_sum(i));
}

TEST(Adders, SingleAdderLocalised) {
  const AdderScenario sc{AdderLayout{}};
  const auto ev = evaluate_adders(sc, {{"adder1_7", 0x1235u}});
  EXPECT_EQ(std::count(ev.flag1.begin(), ev.flag1.end(), true), 1);
  EXPECT_TRUE(ev.flag1[7]);
  EXPECT_EQ(ev.flt_sig.cluster1(), 8u);
  EXPECT_EQ(ev.flt_sig.cluster2(), 0u);
  EXPECT_EQ(ev.out1[7], sc.expected_sum(7) ^ 0x1235u);
}

// Corrupt the adder's frames on a real fabric and localise it from the diff.
TEST(Adders, CompletenessOverEveryAdder) {
  const AdderScenario sc{AdderLayout{}};
  const Fabric golden(FabricGeometry{});
  for (int c : {1, 2}) {
    for (std::size_t k = 0; k < sc.n(); ++k) {
      Fabric fab = golden;
      const auto& p = sc.cluster(c)[k];
      fab.apply_frames({p.prr_id, p.first_frame}, std::vector<Word>(4, 0xFFFFFFFFu));
      const auto corrupted = fab.diff_corrupted_units(sc.placements());
      ASSERT_EQ(corrupted.size(), 1u);
      const auto sig = evaluate_adders(sc, corrupted).flt_sig;
      ASSERT_EQ(c == 1 ? sig.cluster1() : sig.cluster2(), k + 1);
      ASSERT_EQ(c == 1 ? sig.cluster2() : sig.cluster1(), 0u);
    }
  }
}

TEST(Adders, SoundnessOnRandomSets) {
  const AdderScenario sc{AdderLayout{}};
  std::mt19937 rng(23);
  for (int t = 0; t < 500; ++t) {
    CorruptedUnits set;
    for (int j = 0; j < 5; ++j)
      set.emplace(AdderScenario::adder_id(1 + static_cast<int>(rng() % 2), rng() % 500), rng() | 1u);
    const auto ev = evaluate_adders(sc, set);
    for (std::size_t i = 0; i < sc.n(); ++i) {
      ASSERT_EQ(ev.flag1[i], set.contains(AdderScenario::adder_id(1, i)));
      ASSERT_EQ(ev.flag2[i], set.contains(AdderScenario::adder_id(2, i)));
    }
  }
}

TEST(Adders, CorruptedEncoderFieldFromFabricDigest) {
  const AdderScenario sc{AdderLayout{}};
  Fabric fab{FabricGeometry{}};
  const auto& p1 = sc.encoder(1);
  fab.apply_frames({p1.prr_id, p1.first_frame}, std::vector<Word>(4, 0x0F0F0F0Fu));
  const auto corrupted = fab.diff_corrupted_units(sc.placements());
  ASSERT_EQ(corrupted.size(), 1u);
  const std::uint32_t digest = fab.unit_delta_digest(p1);
  ASSERT_EQ(corrupted.at("p1"), digest);
  const auto sig = evaluate_adders(sc, corrupted).flt_sig;
  EXPECT_EQ(sig.cluster1(), (0u ^ digest) & 0x3FFu);
  EXPECT_NE(sig.cluster1(), 0u);
  EXPECT_EQ(sig.cluster2(), 0u);
}

TEST(AesVictims, FlagEncoding) {
  const AesScenario sc{default_aes_layout()};
  EXPECT_EQ(aes::to_hex(sc.expected_ct()), "69c4e0d86a7b0430d8cdb78070b4c55a");
  EXPECT_EQ(evaluate_aes(sc, {}).flt_sig.value, 0u);
  const auto one = evaluate_aes(sc, {{"aes1", 0x01020305u}});
  EXPECT_EQ(one.flt_sig.value, 1u);
  EXPECT_EQ(aes::to_hex(one.ct1), "69c4e0d86a7b0430d8cdb78071b6c65f");
  EXPECT_EQ(one.ct2, sc.expected_ct());
  EXPECT_EQ(evaluate_aes(sc, {{"aes2", 1u}}).flt_sig.value, 2u);
  EXPECT_EQ(evaluate_aes(sc, {{"aes1", 1u}, {"aes2", 3u}}).flt_sig.value, 3u);
}

TEST(AesVictims, RangeProperty) {
  const AesScenario sc{default_aes_layout()};
  std::mt19937 rng(4);
  for (int t = 0; t < 1000; ++t) {
    CorruptedUnits set;
    if (rng() & 1) set.emplace("aes1", rng() | 1u);
    if (rng() & 1) set.emplace("aes2", rng() | 1u);
    const auto ev = evaluate_aes(sc, set);
    ASSERT_LE(ev.flt_sig.value, 3u);
    ASSERT_EQ(ev.flt_sig.value, (ev.flag1 ? 1u : 0u) + 2u * (ev.flag2 ? 1u : 0u));
    ASSERT_EQ(ev.flag1, set.contains("aes1"));
    ASSERT_EQ(ev.flag2, set.contains("aes2"));
  }
}

TEST(VictimScenario, Dispatch) {
  const VictimScenario adders{AdderScenario{AdderLayout{}}};
  const VictimScenario aes{AesScenario{default_aes_layout()}};
  EXPECT_EQ(victim_placements(adders).size(), 1002u);
  EXPECT_EQ(victim_placements(aes).size(), 2u);
  EXPECT_EQ(evaluate_victims(adders, {{"adder2_0", 1u}}).value, 1u << 10);
  EXPECT_EQ(evaluate_victims(aes, {{"aes2", 1u}}).value, 2u);
}

}  // namespace
