#include "tabhash/hashers.hpp"

#include <bit>
#include <fstream>
#include "json.hpp"
#include <sstream>

namespace tabhash {

namespace detail {
void throw_key_range(Key x, const TabConfig& cfg) {
  throw DomainError("key " + std::to_string(x) + " outside universe of " +
                    std::to_string(cfg.key_bits()) + "-bit keys");
}
}  // namespace detail

namespace {

void check_tables(const std::vector<CharTable>& tables, std::size_t count,
                  std::uint64_t alphabet, unsigned entry_bits, const char* what) {
  if (tables.size() != count) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(count) +
                      " tables, got " + std::to_string(tables.size()));
  }
  for (const auto& t : tables) {
    if (t.size() != alphabet) {
      throw ConfigError(std::string(what) + ": table length " + std::to_string(t.size()) +
                        " != alphabet " + std::to_string(alphabet));
    }
    for (auto e : t.entries) {
      if (e & ~low_mask(entry_bits)) {
        throw ConfigError(std::string(what) + ": entry exceeds " +
                          std::to_string(entry_bits) + " bits");
      }
    }
  }
}

std::vector<CharTable> unflatten(const std::vector<std::uint64_t>& flat, std::size_t stride,
                                 unsigned entry_bits) {
  std::vector<CharTable> out;
  for (std::size_t off = 0; off < flat.size(); off += stride) {
    CharTable t;
    t.entry_bits = entry_bits;
    t.entries.assign(flat.begin() + static_cast<std::ptrdiff_t>(off),
                     flat.begin() + static_cast<std::ptrdiff_t>(off + stride));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

// --- SimpleTab ---------------------------------------------------------------

SimpleTab::SimpleTab(const TabConfig& cfg, std::vector<CharTable> tables)
    : cfg_(cfg), stride_(cfg.alphabet()) {
  check_tables(tables, cfg.chars(), cfg.alphabet(), cfg.out_bits(), "simple tabulation");
  flat_.reserve(cfg.chars() * stride_);
  for (const auto& t : tables) flat_.insert(flat_.end(), t.entries.begin(), t.entries.end());
}

SimpleTab SimpleTab::random(const TabConfig& cfg, EntropySource& src) {
  return SimpleTab(cfg, fill_tables(src, cfg.chars(), cfg.alphabet(), cfg.out_bits()));
}

std::vector<CharTable> SimpleTab::tables() const {
  return unflatten(flat_, stride_, cfg_.out_bits());
}

// --- TwistedTab --------------------------------------------------------------

TwistedTab::TwistedTab(const TabConfig& cfg, std::vector<CharTable> star_tables,
                       CharTable head_table, HeadPosition head)
    : cfg_(cfg),
      head_pos_(head),
      head_index_(head == HeadPosition::low ? 0 : cfg.chars() - 1),
      char_mask_(low_mask(cfg.char_bits())),
      stride_(cfg.alphabet()) {
  if (cfg.char_bits() + cfg.out_bits() > 64) {
    throw ConfigError("twisted tabulation needs char_bits + out_bits <= 64");
  }
  check_tables(star_tables, cfg.chars() - 1, cfg.alphabet(), cfg.char_bits() + cfg.out_bits(),
               "twisted star tables");
  check_tables({head_table}, 1, cfg.alphabet(), cfg.out_bits(), "twisted head table");
  for (const auto& t : star_tables) {
    star_flat_.insert(star_flat_.end(), t.entries.begin(), t.entries.end());
  }
  head_ = std::move(head_table.entries);
}

TwistedTab TwistedTab::random(const TabConfig& cfg, EntropySource& src, HeadPosition head) {
  if (cfg.char_bits() + cfg.out_bits() > 64) {
    throw ConfigError("twisted tabulation needs char_bits + out_bits <= 64");
  }
  auto star = fill_tables(src, cfg.chars() - 1, cfg.alphabet(), cfg.char_bits() + cfg.out_bits());
  auto head_table = fill_tables(src, 1, cfg.alphabet(), cfg.out_bits());
  return TwistedTab(cfg, std::move(star), std::move(head_table.front()), head);
}

Key TwistedTab::twist_key(Key x) const {
  if (!cfg_.contains(x)) detail::throw_key_range(x, cfg_);
  const std::uint64_t t = star_xor(x) & char_mask_;
  return x ^ (t << (head_index_ * cfg_.char_bits()));
}

TwistedTab::Decomposed TwistedTab::decompose() const {
  if (cfg_.chars() < 2) throw ConfigError("decomposition needs a tail (c >= 2)");
  const unsigned b = cfg_.char_bits();
  const TabConfig twister_cfg(b, cfg_.chars() - 1, b);
  std::vector<CharTable> twister_tables;
  std::vector<CharTable> simple_tables(cfg_.chars());
  std::size_t star = 0;
  for (unsigned i = 0; i < cfg_.chars(); ++i) {
    CharTable& s = simple_tables[i];
    s.entry_bits = cfg_.out_bits();
    if (i == head_index_) {
      s.entries = head_;
      continue;
    }
    CharTable tw;
    tw.entry_bits = b;
    tw.entries.resize(stride_);
    s.entries.resize(stride_);
    for (std::size_t v = 0; v < stride_; ++v) {
      const std::uint64_t e = star_flat_[star * stride_ + v];
      tw.entries[v] = e & char_mask_;
      s.entries[v] = e >> b;
    }
    twister_tables.push_back(std::move(tw));
    ++star;
  }
  return {SimpleTab(twister_cfg, std::move(twister_tables)),
          SimpleTab(cfg_, std::move(simple_tables))};
}

std::vector<CharTable> TwistedTab::star_tables() const {
  return unflatten(star_flat_, stride_, cfg_.char_bits() + cfg_.out_bits());
}

CharTable TwistedTab::head_table() const { return CharTable{head_, cfg_.out_bits()}; }

TwistedTab TwistedTab::with_head_entry(Char twisted_head, std::uint64_t value) const {
  if (twisted_head >= cfg_.alphabet()) throw DomainError("head character outside alphabet");
  TwistedTab copy = *this;
  copy.head_[twisted_head] = value & low_mask(cfg_.out_bits());
  return copy;
}

// --- DoubleTab ---------------------------------------------------------------

namespace {
TabConfig double_config(const SimpleTab& inner, const SimpleTab& outer) {
  const auto& ic = inner.config();
  const auto& oc = outer.config();
  if (ic.char_bits() != oc.char_bits()) {
    throw ConfigError("double tabulation: inner and outer alphabets differ");
  }
  if (ic.out_bits() != oc.chars() * oc.char_bits()) {
    throw ConfigError("double tabulation: inner output must be d characters");
  }
  return TabConfig(ic.char_bits(), ic.chars(), oc.out_bits(), oc.chars());
}

void require_derived(const TabConfig& cfg, unsigned extra_bits, const char* what) {
  if (cfg.derived_chars() < 1) {
    throw ConfigError(std::string(what) + " needs at least one derived character");
  }
  if (cfg.derived_chars() * cfg.char_bits() + extra_bits > 64) {
    throw ConfigError(std::string(what) + ": packed entries exceed 64 bits");
  }
}
}  // namespace

DoubleTab::DoubleTab(SimpleTab inner, SimpleTab outer)
    : cfg_(double_config(inner, outer)), inner_(std::move(inner)), outer_(std::move(outer)) {}

DoubleTab DoubleTab::random(const TabConfig& cfg, EntropySource& src) {
  require_derived(cfg, 0, "double tabulation");
  const unsigned d = cfg.derived_chars();
  auto inner = SimpleTab::random(TabConfig(cfg.char_bits(), cfg.chars(), d * cfg.char_bits()), src);
  auto outer = SimpleTab::random(TabConfig(cfg.char_bits(), d, cfg.out_bits()), src);
  return DoubleTab(std::move(inner), std::move(outer));
}

// --- MixedTab ----------------------------------------------------------------

namespace {
TabConfig combined_config(const TabConfig& cfg) {
  require_derived(cfg, cfg.out_bits(), "mixed tabulation");
  return TabConfig(cfg.char_bits(), cfg.chars(),
                   cfg.derived_chars() * cfg.char_bits() + cfg.out_bits());
}
}  // namespace

MixedTab::MixedTab(const TabConfig& cfg, std::vector<CharTable> combined, SimpleTab derived_part)
    : cfg_(cfg),
      derived_bits_(cfg.derived_chars() * cfg.char_bits()),
      combined_(combined_config(cfg), std::move(combined)),
      derived_part_(std::move(derived_part)) {
  const auto& dc = derived_part_.config();
  if (dc.char_bits() != cfg.char_bits() || dc.chars() != cfg.derived_chars() ||
      dc.out_bits() != cfg.out_bits()) {
    throw ConfigError("mixed tabulation: derived-part geometry mismatch");
  }
}

MixedTab MixedTab::random(const TabConfig& cfg, EntropySource& src) {
  const TabConfig cc = combined_config(cfg);
  auto combined = fill_tables(src, cc.chars(), cc.alphabet(), cc.out_bits());
  auto derived =
      SimpleTab::random(TabConfig(cfg.char_bits(), cfg.derived_chars(), cfg.out_bits()), src);
  return MixedTab(cfg, std::move(combined), std::move(derived));
}

std::vector<Char> MixedTab::derive_key(Key x) const {
  if (!cfg_.contains(x)) detail::throw_key_range(x, cfg_);
  std::vector<Char> out = split_key(x, cfg_);
  const std::uint64_t v = combined_.eval(x);
  for (unsigned j = 0; j < cfg_.derived_chars(); ++j) {
    out.push_back(char_at(v, j, cfg_.char_bits()));
  }
  return out;
}

// --- PolyHasher --------------------------------------------------------------

namespace {
inline std::uint64_t mersenne_reduce(unsigned __int128 z) {
  constexpr std::uint64_t p = PolyHasher::kPrime;
  std::uint64_t r = static_cast<std::uint64_t>(z & p) + static_cast<std::uint64_t>(z >> 61);
  r = (r & p) + (r >> 61);
  return r >= p ? r - p : r;
}
}  // namespace

PolyHasher::PolyHasher(std::vector<std::uint64_t> coefficients, std::uint64_t range)
    : coeffs_(std::move(coefficients)), range_(range) {
  if (coeffs_.empty()) throw ConfigError("polynomial hash needs k >= 1 coefficients");
  if (range_ == 0) throw ConfigError("polynomial hash range must be positive");
  for (auto a : coeffs_) {
    if (a >= kPrime) throw ConfigError("polynomial coefficient not below p");
  }
  out_bits_ = range_ == 1 ? 1 : static_cast<unsigned>(std::bit_width(range_ - 1));
}

PolyHasher PolyHasher::random(unsigned k, std::uint64_t range, EntropySource& src) {
  std::vector<std::uint64_t> a(k);
  for (auto& v : a) {
    do {
      v = src.next_u64() & kPrime;
    } while (v == kPrime);
  }
  return PolyHasher(std::move(a), range);
}

std::uint64_t PolyHasher::operator()(Key x) const {
  if (x >= kPrime) throw DomainError("polynomial hash key not below p = 2^61 - 1");
  std::uint64_t acc = coeffs_.back();
  for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
    acc = mersenne_reduce(static_cast<unsigned __int128>(acc) * x + coeffs_[i]);
  }
  return acc % range_;
}

// --- MultShiftHasher / TrulyRandomHasher ------------------------------------

MultShiftHasher::MultShiftHasher(std::uint64_t a, std::uint64_t b, unsigned out_bits)
    : a_(a), b_(b), out_bits_(out_bits) {
  if ((a & 1) == 0) throw ConfigError("multiply-shift multiplier must be odd");
  if (out_bits < 1 || out_bits > 64) throw ConfigError("multiply-shift out_bits outside [1, 64]");
}

MultShiftHasher MultShiftHasher::random(unsigned out_bits, EntropySource& src) {
  const std::uint64_t a = src.next_u64() | 1;
  const std::uint64_t b = src.next_u64();
  return MultShiftHasher(a, b, out_bits);
}

namespace {
constexpr std::uint64_t kIdealNonce = 0x006873686c616564ULL;  // "dealhsh\0"
}

TrulyRandomHasher::TrulyRandomHasher(std::uint64_t seed, unsigned out_bits)
    : seed_(seed), out_bits_(out_bits) {
  if (out_bits < 1 || out_bits > 64) throw ConfigError("out_bits outside [1, 64]");
}

std::uint64_t TrulyRandomHasher::operator()(Key x) const {
  return chacha_word(seed_, kIdealNonce, x) & low_mask(out_bits_);
}

// --- schemes -----------------------------------------------------------------

std::string_view scheme_name(Scheme s) noexcept {
  switch (s) {
    case Scheme::simple: return "simple";
    case Scheme::twisted: return "twisted";
    case Scheme::double_tab: return "double";
    case Scheme::mixed: return "mixed";
    case Scheme::poly: return "poly-k";
    case Scheme::mult_shift: return "mult-shift";
    case Scheme::truly_random: return "truly-random";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "simple") return Scheme::simple;
  if (name == "twisted") return Scheme::twisted;
  if (name == "double") return Scheme::double_tab;
  if (name == "mixed") return Scheme::mixed;
  if (name == "poly-k" || name == "poly") return Scheme::poly;
  if (name == "mult-shift") return Scheme::mult_shift;
  if (name == "truly-random") return Scheme::truly_random;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

AnyHasher make_hasher(Scheme scheme, const TabConfig& cfg, std::uint64_t seed, unsigned poly_k) {
  auto src = EntropySource::seeded(seed);
  switch (scheme) {
    case Scheme::simple: return SimpleTab::random(cfg, src);
    case Scheme::twisted: return TwistedTab::random(cfg, src);
    case Scheme::double_tab: return DoubleTab::random(cfg, src);
    case Scheme::mixed: return MixedTab::random(cfg, src);
    case Scheme::poly:
      if (cfg.key_bits() > 61) throw ConfigError("poly-k needs keys below 2^61 - 1");
      if (poly_k < 1) throw ConfigError("poly-k needs k >= 1");
      return PolyHasher::random(poly_k, cfg.out_bits() >= 64 ? PolyHasher::kPrime
                                                             : std::uint64_t{1} << cfg.out_bits(),
                                src);
    case Scheme::mult_shift: return MultShiftHasher::random(cfg.out_bits(), src);
    case Scheme::truly_random: return TrulyRandomHasher(seed, cfg.out_bits());
  }
  throw ConfigError("unknown scheme");
}

Scheme scheme_of(const AnyHasher& h) noexcept {
  constexpr Scheme order[] = {Scheme::simple,     Scheme::twisted, Scheme::double_tab,
                              Scheme::mixed,      Scheme::poly,    Scheme::mult_shift,
                              Scheme::truly_random};
  return order[h.index()];
}

// --- serialization -----------------------------------------------------------

namespace {

nlohmann::json cfg_json(const TabConfig& c) {
  return {{"char_bits", c.char_bits()},
          {"c", c.chars()},
          {"out_bits", c.out_bits()},
          {"derived_chars", c.derived_chars()}};
}

TabConfig cfg_from_json(const nlohmann::json& j) {
  return TabConfig(j.at("char_bits").get<unsigned>(), j.at("c").get<unsigned>(),
                   j.at("out_bits").get<unsigned>(), j.at("derived_chars").get<unsigned>());
}

struct Serialized {
  nlohmann::json descriptor;
  std::vector<TableSection> sections;
};

Serialized serialize(const AnyHasher& any) {
  Serialized s;
  s.descriptor["kind"] = std::string(scheme_name(scheme_of(any)));
  std::visit(
      [&](const auto& h) {
        using T = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<T, SimpleTab>) {
          s.descriptor["cfg"] = cfg_json(h.config());
          s.sections.push_back({h.config().char_bits(), h.tables()});
        } else if constexpr (std::is_same_v<T, TwistedTab>) {
          s.descriptor["cfg"] = cfg_json(h.config());
          s.descriptor["head"] = h.head_position() == HeadPosition::low ? "low" : "high";
          const auto b = h.config().char_bits();
          if (h.config().chars() > 1) s.sections.push_back({b, h.star_tables()});
          s.sections.push_back({b, {h.head_table()}});
        } else if constexpr (std::is_same_v<T, DoubleTab>) {
          s.descriptor["cfg"] = cfg_json(h.config());
          const auto b = h.config().char_bits();
          s.sections.push_back({b, h.inner().tables()});
          s.sections.push_back({b, h.outer().tables()});
        } else if constexpr (std::is_same_v<T, MixedTab>) {
          s.descriptor["cfg"] = cfg_json(h.config());
          const auto b = h.config().char_bits();
          s.sections.push_back({b, h.combined_tables()});
          s.sections.push_back({b, h.derived_part().tables()});
        } else if constexpr (std::is_same_v<T, PolyHasher>) {
          s.descriptor["coefficients"] = h.coefficients();
          s.descriptor["range"] = h.range();
        } else if constexpr (std::is_same_v<T, MultShiftHasher>) {
          s.descriptor["a"] = h.multiplier();
          s.descriptor["b"] = h.addend();
          s.descriptor["out_bits"] = h.out_bits();
        } else {
          s.descriptor["seed"] = h.seed();
          s.descriptor["out_bits"] = h.out_bits();
        }
      },
      any);
  return s;
}

}  // namespace

std::string hasher_descriptor(const AnyHasher& h) { return serialize(h).descriptor.dump(); }

void save_hasher(const std::filesystem::path& path, const AnyHasher& h) {
  const auto s = serialize(h);
  save_tables(path, s.sections);
  auto json_path = path;
  json_path += ".json";
  std::ofstream os(json_path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + json_path.string() + " for writing");
  os << s.descriptor.dump() << '\n';
  if (!os) throw IoError("failed writing " + json_path.string());
}

AnyHasher load_hasher(const std::filesystem::path& path) {
  auto json_path = path;
  json_path += ".json";
  std::ifstream is(json_path);
  if (!is) throw IoError("cannot open " + json_path.string());
  nlohmann::json d;
  try {
    is >> d;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad hasher descriptor: " + std::string(e.what()));
  }
  const Scheme scheme = parse_scheme(d.at("kind").get<std::string>());
  auto sections = load_tables(path);
  auto need = [&](std::size_t n) {
    if (sections.size() != n) throw IoError("hasher table file has wrong section count");
  };
  switch (scheme) {
    case Scheme::simple: {
      need(1);
      return SimpleTab(cfg_from_json(d.at("cfg")), std::move(sections[0].tables));
    }
    case Scheme::twisted: {
      const auto cfg = cfg_from_json(d.at("cfg"));
      const auto head = d.at("head").get<std::string>() == "low" ? HeadPosition::low
                                                                 : HeadPosition::high;
      if (cfg.chars() == 1) {
        need(1);
        return TwistedTab(cfg, {}, std::move(sections[0].tables.at(0)), head);
      }
      need(2);
      return TwistedTab(cfg, std::move(sections[0].tables), std::move(sections[1].tables.at(0)),
                        head);
    }
    case Scheme::double_tab: {
      need(2);
      const auto cfg = cfg_from_json(d.at("cfg"));
      const unsigned b = cfg.char_bits();
      const unsigned dd = cfg.derived_chars();
      return DoubleTab(SimpleTab(TabConfig(b, cfg.chars(), dd * b), std::move(sections[0].tables)),
                       SimpleTab(TabConfig(b, dd, cfg.out_bits()), std::move(sections[1].tables)));
    }
    case Scheme::mixed: {
      need(2);
      const auto cfg = cfg_from_json(d.at("cfg"));
      return MixedTab(cfg, std::move(sections[0].tables),
                      SimpleTab(TabConfig(cfg.char_bits(), cfg.derived_chars(), cfg.out_bits()),
                                std::move(sections[1].tables)));
    }
    case Scheme::poly:
      return PolyHasher(d.at("coefficients").get<std::vector<std::uint64_t>>(),
                        d.at("range").get<std::uint64_t>());
    case Scheme::mult_shift:
      return MultShiftHasher(d.at("a").get<std::uint64_t>(), d.at("b").get<std::uint64_t>(),
                             d.at("out_bits").get<unsigned>());
    case Scheme::truly_random:
      return TrulyRandomHasher(d.at("seed").get<std::uint64_t>(), d.at("out_bits").get<unsigned>());
  }
  throw IoError("unknown hasher kind");
}

}  // namespace tabhash
