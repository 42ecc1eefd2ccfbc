#include "scamrank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "scamrank/featurizer.hpp"
#include "scamrank/oracle.hpp"

namespace scamrank {

namespace {

const std::vector<std::vector<std::string>> kProducts = {
    {"sneakers", "handbag", "jacket", "dress", "boots", "wallet", "hoodie", "jeans", "scarf", "sandals", "belt",
     "backpack"},
    {"pills", "capsules", "tablets", "supplement", "vitamins", "cream", "serum", "inhaler", "antibiotics",
     "painkillers", "steroids", "syrup"},
    {"bitcoin", "coins", "ethereum", "mining", "staking", "exchange", "airdrop", "blockchain", "trading", "forex",
     "signals", "bonds"},
    {"laptop", "headphones", "camera", "phone", "speaker", "monitor", "charger", "drone", "console", "keyboard",
     "printer", "router"},
    {"tickets", "flights", "hotel", "concert", "cruise", "festival", "stadium", "resort", "passes", "seats", "tour",
     "rental"},
    {"sofa", "mattress", "lamp", "curtains", "rug", "desk", "chair", "shelf", "blanket", "pillow", "mirror",
     "wardrobe"},
};

const std::vector<std::string> kCategoryNames = {"fashion", "pharmacy", "crypto", "electronics", "travel", "home"};

struct Cue {
  const char* word;
  double weight;
};

// Weak, category-agnostic cues.
const std::vector<Cue> kCues = {
    {"cheap", 0.6},       {"replica", 0.9},     {"wholesale", 0.5},  {"discount", 0.4},   {"free", 0.5},
    {"clearance", 0.4},   {"bulk", 0.4},        {"generic", 0.5},    {"lowest", 0.5},     {"instant", 0.4},
    {"unlocked", 0.5},    {"outlet", 0.4},      {"copy", 0.7},       {"bargain", 0.4},    {"fast", 0.3},
    {"guaranteed", 0.6},  {"secret", 0.5},      {"hack", 0.7},       {"knockoff", 0.6},     {"unlimited", 0.4},
    {"review", -0.6},     {"official", -0.8},   {"history", -0.7},   {"repair", -0.5},    {"manual", -0.6},
    {"guide", -0.5},      {"how", -0.5},        {"warranty", -0.6},  {"authorized", -0.8}, {"return", -0.4},
    {"museum", -0.6},     {"recall", -0.5},     {"safety", -0.6},    {"tutorial", -0.5},  {"university", -0.7},
    {"library", -0.6},    {"government", -0.7}, {"recycle", -0.5},   {"donate", -0.6},    {"insurance", -0.4},
};

const std::vector<std::string> kFillers = {"best", "new", "online", "buy", "sale", "for", "men", "women", "kids",
                                           "black", "blue", "size", "price", "near", "me", "shop", "top", "small",
                                           "large", "red", "white", "green", "today", "store"};

// Ordered from mild to extreme; scam descriptions draw around the latent
// propensity on this scale.
const std::vector<std::string> kSeverity = {"limited", "special", "exclusive", "shocking", "unbelievable",
                                            "insane", "crazy", "miracle", "jackpot", "giveaway"};

const std::vector<std::string> kScamFiller = {"deal", "order", "now", "ships", "worldwide", "pay", "crypto",
                                              "card", "hurry", "stock"};
const std::vector<std::string> kBenignFiller = {"information", "customer", "support", "service", "company",
                                                "founded", "about", "policy", "contact", "team", "reviews",
                                                "returns"};
const std::vector<std::string> kTitleFiller = {"home", "page", "site", "welcome", "products", "shop", "store",
                                               "online", "official", "new"};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace

SyntheticLupiCorpus make_lupi_corpus(const SyntheticLupiConfig& cfg) {
  if (cfg.categories < 1 || cfg.categories > static_cast<int>(kProducts.size()))
    throw Error("synthetic corpus supports 1.." + std::to_string(kProducts.size()) + " categories");
  if (cfg.sites_per_query < 1 || cfg.queries_per_category < 1) throw Error("synthetic corpus sizes must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> effect(0.0, cfg.query_effect_std);
  std::normal_distribution<double> jitter(0.0, 0.8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticLupiCorpus out;
  int domain_counter = 0;
  for (int c = 0; c < cfg.categories; ++c) {
    const auto& products = kProducts[static_cast<std::size_t>(c)];
    const std::string cat = kCategoryNames[static_cast<std::size_t>(c)];
    out.categories.push_back(cat);
    std::set<std::string> seen;
    int made = 0, attempts = 0;
    while (made < cfg.queries_per_category) {
      if (++attempts > cfg.queries_per_category * 200) throw Error("could not generate enough distinct queries");
      std::vector<std::string> words{pick(products, rng)};
      double z = -1.2;
      double r = unit(rng);
      int n_cues = r < 0.25 ? 0 : (r < 0.75 ? 1 : 2);
      std::set<std::string> used;
      for (int k = 0; k < n_cues; ++k) {
        const auto& cue = pick(kCues, rng);
        if (!used.insert(cue.word).second) continue;
        words.emplace_back(cue.word);
        z += cue.weight;
      }
      int n_fill = static_cast<int>(unit(rng) * 3.0);
      for (int k = 0; k < n_fill; ++k) words.push_back(pick(kFillers, rng));
      std::shuffle(words.begin(), words.end(), rng);
      std::string query;
      for (auto& w : words) query += (query.empty() ? "" : " ") + w;
      const double p = logistic(z + effect(rng));
      if (!seen.insert(query).second) continue;
      ++made;

      LupiExample ex;
      ex.query = query;
      ex.category = cat;
      ex.serp.query = query;
      int scams = 0;
      for (int rank = 1; rank <= cfg.sites_per_query; ++rank) {
        const bool scam = unit(rng) < p;
        const std::string domain = (scam ? "deal" : "site") + std::to_string(++domain_counter) + (scam ? ".shop" : ".com");
        out.verdicts[domain] = scam ? Label::Scam : Label::Benign;
        scams += scam;
        SerpEntry e;
        e.engine = Engine::Google;
        e.rank = rank;
        e.url = "https://www." + domain + "/" + pick(products, rng);
        e.root_domain = domain;
        e.title = pick(products, rng) + " " + pick(kTitleFiller, rng) + " " + pick(kTitleFiller, rng);
        std::string desc = pick(products, rng);
        if (scam) {
          for (int k = 0; k < 2; ++k) {
            int level = std::clamp(static_cast<int>(std::lround(p * 9.0 + jitter(rng))), 0, 9);
            desc += " " + kSeverity[static_cast<std::size_t>(level)];
          }
          for (int k = 0; k < 3; ++k) desc += " " + pick(kScamFiller, rng);
        } else {
          for (int k = 0; k < 4; ++k) desc += " " + pick(kBenignFiller, rng);
        }
        e.description = desc;
        ex.serp.entries.push_back(std::move(e));
      }
      ex.expansion = scams;
      ex.toxicity = static_cast<double>(scams) / cfg.sites_per_query;
      out.examples.push_back(std::move(ex));
      out.latent.push_back(p);
      out.query_signal.push_back(z);
    }
  }
  return out;
}

namespace {

const std::string kCaptureDate = "2025-01-15";

DomainSnapshot make_snapshot(const std::string& domain, bool scam, bool parked, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> days(0, 3000);
  DomainSnapshot s;
  s.url = "https://www." + domain + "/";
  s.final_url = s.url;
  s.fetched_at = parse_timestamp("2025-01-20T12:00:00Z");
  auto fetched = parse_date("2025-01-20");
  s.dns["A"] = {"203.0.113." + std::to_string(days(rng) % 250 + 1)};
  if (scam) {
    s.whois.created = fetched - std::chrono::days(10 + days(rng) % 60);
    s.whois.expires = *s.whois.created + std::chrono::days(365);
    s.whois.registrar = "NameSilo, LLC";
    s.whois.privacy = true;
    s.html = "<html><head><title>" + domain + " outlet</title></head><body><h1>Limited offer</h1>"
             "<p>Up to 90% off. Pay with crypto or gift card. Hurry, stock is running out!</p>"
             "<form><input type=\"text\" name=\"card\"></form></body></html>";
  } else {
    s.whois.created = parse_date("2001-03-01") + std::chrono::days(days(rng) + 300);
    s.whois.expires = parse_date("2030-01-01");
    s.whois.registrar = "MarkMonitor Inc.";
    s.whois.privacy = false;
    s.ranks.tranco = 1000 + days(rng) * 40;
    s.ranks.majestic = 2000 + days(rng) * 50;
    s.dns["MX"] = {"mail." + domain};
    s.html = "<html><head><title>" + domain + "</title></head><body><h1>About our company</h1>"
             "<p>Founded in 2003. Customer service, returns policy and contact information.</p>"
             "<a href=\"/privacy\">Privacy</a> <a href=\"/terms\">Terms</a></body></html>";
  }
  if (parked)
    s.html = "<html><head><title>" + domain + "</title></head><body><p>This domain is parked free, courtesy of "
             "the registrar.</p><p>Buy this domain</p></body></html>";
  return s;
}

}  // namespace

void write_fixture_pack(const std::filesystem::path& dir, const FixturePackConfig& cfg) {
  std::filesystem::create_directories(dir);
  auto corpus = make_lupi_corpus({cfg.categories, cfg.queries_per_category, 10, 0.5, cfg.seed});
  std::mt19937_64 rng(cfg.seed ^ 0x9ac4);

  // Shared domain pools so that queries overlap in the domains they surface.
  const int n_scam = 4 * cfg.queries_per_category * cfg.categories / 5 + 20;
  const int n_benign = 5 * cfg.queries_per_category * cfg.categories / 5 + 20;
  std::vector<std::string> scam_pool, benign_pool;
  for (int i = 1; i <= n_scam; ++i) scam_pool.push_back("deal" + std::to_string(i) + ".shop");
  for (int i = 1; i <= n_benign; ++i) benign_pool.push_back("site" + std::to_string(i) + ".com");

  VerdictMap planted;
  std::vector<LupiExample> examples;
  std::filesystem::remove(dir / "serp_store.jsonl");
  FixtureStore store(dir / "serp_store.jsonl");
  for (auto& src : corpus.examples) {
    LupiExample ex = src;
    std::set<std::string> used;
    for (auto& e : ex.serp.entries) {
      bool scam = corpus.verdicts.at(e.root_domain) == Label::Scam;
      auto& pool = scam ? scam_pool : benign_pool;
      std::string d;
      do d = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      while (used.count(d));
      used.insert(d);
      planted[d] = scam ? Label::Scam : Label::Benign;
      e.root_domain = d;
      e.url = "https://www." + d + "/" + split_whitespace(ex.query).front();
    }
    store.put(ex.serp, Engine::Google, kCaptureDate);

    // A second engine showing the same sites deeper in its result list.
    SerpResultSet bing;
    bing.query = ex.query;
    auto order = ex.serp.entries;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto e = order[i];
      e.engine = Engine::Bing;
      e.rank = static_cast<int>(3 * (i + 1));
      bing.entries.push_back(e);
    }
    store.put(bing, Engine::Bing, kCaptureDate);
    examples.push_back(std::move(ex));
  }

  // Seed labels: dedicated training domains plus a few pool domains that
  // discovery must treat as already known.
  std::vector<LabeledDomain> labels;
  std::vector<DomainSnapshot> snapshots;
  std::vector<FeatureVector> train_x;
  std::vector<int> train_y;
  const auto& featurizer = Featurizer::bundled();
  for (int i = 1; i <= 25; ++i) {
    for (bool scam : {true, false}) {
      std::string d = (scam ? "seedshop" : "seedbrand") + std::to_string(i) + (scam ? ".shop" : ".com");
      auto snap = make_snapshot(d, scam, false, rng);
      train_x.push_back(featurizer.extract(snap));
      train_y.push_back(scam);
      labels.push_back({d, scam ? Label::Scam : Label::Benign, corpus.categories[static_cast<std::size_t>(i) %
                                                                                  corpus.categories.size()]});
      snapshots.push_back(std::move(snap));
    }
  }
  std::vector<std::string> pool_domains;
  for (auto& [d, l] : planted) pool_domains.push_back(d);
  std::set<std::string> known;
  for (std::size_t i = 0; i < pool_domains.size(); i += 17) {
    known.insert(pool_domains[i]);
    labels.push_back({pool_domains[i], planted[pool_domains[i]], corpus.categories.front()});
  }

  GbdtConfig gbdt;
  gbdt.rounds = 50;
  gbdt.seed = cfg.seed;
  auto oracle = train_oracle(train_x, train_y, gbdt, oracle_schema());

  // Pool snapshots; every 23rd domain has none and every 29th is parked.
  std::string truth = "root_domain,label\n";
  for (std::size_t i = 0; i < pool_domains.size(); ++i) {
    const auto& d = pool_domains[i];
    bool scam = planted[d] == Label::Scam;
    if (i % 23 == 5) {
      truth += d + ",unscored\n";
      continue;
    }
    bool parked = i % 29 == 7;
    auto snap = make_snapshot(d, scam, parked, rng);
    if (!parked && (oracle.predict(featurizer.extract(snap)).label == Label::Scam) != scam)
      throw Error("fixture oracle disagrees with the planted verdict for " + d);
    truth += d + "," + (parked ? "unscored" : std::string(to_string(planted[d]))) + "\n";
    snapshots.push_back(std::move(snap));
  }

  std::vector<KeywordSuggestion> keywords;
  std::uniform_int_distribution<int> comp(0, 2);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    KeywordSuggestion k;
    k.text = examples[i].query;
    k.category = examples[i].category;
    k.source_domain = "seedbrand" + std::to_string(i % 25 + 1) + ".com";
    k.competition = static_cast<Competition>(comp(rng));
    k.monthly_volume = 10 * (1 + static_cast<std::int64_t>(rng() % 500));
    keywords.push_back(std::move(k));
  }

  // Small student distilled from a teacher trained on the pack itself.
  TokenizerConfig tok;
  tok.vocab_size = 2048;
  EncoderConfig enc;
  enc.vocab_size = tok.vocab_size;
  enc.layers = 1;
  enc.dim = 16;
  enc.heads = 2;
  enc.ff_dim = 32;
  PrivilegedConfig priv;
  priv.size = 10;
  LupiTrainConfig train;
  train.lr = 3e-3;
  train.epochs = 3;
  train.batch_size = 16;
  train.seed = cfg.seed;
  auto split = split_validation(examples, 0.1, cfg.seed);
  auto teacher = train_teacher(TeacherModel::init(tok, enc, priv, cfg.seed), split.train, split.validation, planted,
                               train);
  auto student = distill_student(teacher, LossWeights{}, split.train, split.validation, planted, train);

  write_labels(dir / "labels.csv", labels);
  write_keywords(dir / "keywords.jsonl", keywords);
  write_snapshots(dir / "snapshots.jsonl", snapshots);
  write_lupi_examples(dir / "train.jsonl", examples);
  write_file(dir / "truth.csv", truth);
  oracle.save(dir / "oracle.json");
  save_json(dir / "student.json", student_to_json(student));
}

}  // namespace scamrank
