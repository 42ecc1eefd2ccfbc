#include "scamrank/featurizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "scamrank/html.hpp"

namespace scamrank {

using nlohmann::json;

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Boolean: return "B";
    case FeatureKind::Numeric: return "N";
    case FeatureKind::Categorical: return "C";
  }
  return "?";
}

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Ranking: return "ranking";
    case FeatureGroup::Dns: return "dns";
    case FeatureGroup::Url: return "url";
    case FeatureGroup::Whois: return "whois";
    case FeatureGroup::Content: return "content";
  }
  return "?";
}

namespace {

constexpr auto B = FeatureKind::Boolean;
constexpr auto N = FeatureKind::Numeric;
constexpr auto C = FeatureKind::Categorical;

FeatureSchema build_schema() {
  using G = FeatureGroup;
  FeatureSchema s = {
      // Domain ranking
      {"majestic_refips", N, G::Ranking},
      {"majestic_refsubnets", N, G::Ranking},
      {"majestic_tldrank", N, G::Ranking},
      {"tranco", N, G::Ranking},
      {"majestic", N, G::Ranking},
      {"cisco", N, G::Ranking},
      // DNS
      {"dns_has_mx", B, G::Dns},
      {"dns_num_mx", N, G::Dns},
      {"dns_has_cname", B, G::Dns},
      {"dns_num_cname", N, G::Dns},
      {"dns_has_dname", B, G::Dns},
      {"dns_num_dname", N, G::Dns},
      {"dns_has_hinfo", B, G::Dns},
      {"dns_num_hinfo", N, G::Dns},
      {"dns_has_aaaa", B, G::Dns},
      {"dns_num_aaaa", N, G::Dns},
      {"dns_has_ns", B, G::Dns},
      {"dns_num_ns", N, G::Dns},
      {"dns_has_rp", B, G::Dns},
      {"dns_num_rp", N, G::Dns},
      {"dns_has_soa", B, G::Dns},
      {"dns_num_soa", N, G::Dns},
      {"dns_has_txt", B, G::Dns},
      {"dns_num_txt", N, G::Dns},
      {"dns_domain_verification_count", N, G::Dns},
      // URL
      {"tld", C, G::Url},
      {"cheap_tld", B, G::Url},
      {"domain_subwords", N, G::Url},
      {"url_has_hyphen", B, G::Url},
      {"url_has_digit", B, G::Url},
      {"url_subdomain_count", N, G::Url},
      // WHOIS
      {"domain_age", N, G::Whois},
      {"time_to_expiry", N, G::Whois},
      {"registrar_name", C, G::Whois},
      {"is_cheap_registrar", B, G::Whois},
      {"registrar_country", C, G::Whois},
      {"registrant_country", C, G::Whois},
      {"privacy_protected", B, G::Whois},
      {"free_email_provider", B, G::Whois},
      // Content
      {"facebook_profile_linked", B, G::Content},
      {"twitter_profile_linked", B, G::Content},
      {"instagram_profile_linked", B, G::Content},
      {"youtube_profile_linked", B, G::Content},
      {"pinterest_profile_linked", B, G::Content},
      {"tiktok_profile_linked", B, G::Content},
      {"presence_of_contact_link", B, G::Content},
      {"num_mailto_links", N, G::Content},
      {"num_telephone_links", N, G::Content},
      {"num_whatsapp_links", N, G::Content},
      {"review_system_linked", B, G::Content},
      {"has_app_store", B, G::Content},
      {"has_review_widget", B, G::Content},
      {"num_links", N, G::Content},
      {"num_internal_links", N, G::Content},
      {"num_external_links", N, G::Content},
      {"num_img_tags", N, G::Content},
      {"num_iframe_tags", N, G::Content},
      {"num_external_http_links", N, G::Content},
      {"num_links_with_ip", N, G::Content},
      {"presence_work_with_us_link", B, G::Content},
      {"presence_cookie_consent_notice", B, G::Content},
      {"trustpilot_present", B, G::Content},

      // Extension features (appended; the 62 above keep their order).
      {"in_tranco", B, G::Ranking},
      {"in_majestic", B, G::Ranking},
      {"in_cisco", B, G::Ranking},
      {"rank_sources_count", N, G::Ranking},
      {"dns_has_a", B, G::Dns},
      {"dns_num_a", N, G::Dns},
      {"dns_has_caa", B, G::Dns},
      {"dns_num_caa", N, G::Dns},
      {"dns_has_spf", B, G::Dns},
      {"dns_has_dmarc", B, G::Dns},
      {"dns_num_records_total", N, G::Dns},
      {"dns_mx_self_hosted", B, G::Dns},
      {"url_length", N, G::Url},
      {"domain_length", N, G::Url},
      {"domain_label_entropy", N, G::Url},
      {"url_num_digits", N, G::Url},
      {"url_num_hyphens", N, G::Url},
      {"url_is_https", B, G::Url},
      {"url_path_depth", N, G::Url},
      {"registration_length", N, G::Whois},
      {"whois_available", B, G::Whois},
      {"registrant_matches_registrar_country", B, G::Whois},
      {"domain_created_recently", B, G::Whois},
      {"num_h1_h6_tags", N, G::Content},
      {"num_css_classes", N, G::Content},
      {"num_script_tags", N, G::Content},
      {"num_external_scripts", N, G::Content},
      {"num_forms", N, G::Content},
      {"num_input_tags", N, G::Content},
      {"has_password_input", B, G::Content},
      {"num_meta_tags", N, G::Content},
      {"title_length", N, G::Content},
      {"html_length", N, G::Content},
      {"num_words", N, G::Content},
      {"presence_privacy_policy_link", B, G::Content},
      {"presence_terms_link", B, G::Content},
      {"presence_refund_policy_link", B, G::Content},
      {"presence_about_link", B, G::Content},
      {"num_currency_mentions", N, G::Content},
      {"num_discount_mentions", N, G::Content},
      {"telegram_link_present", B, G::Content},
  };
  return s;
}

std::set<std::string> load_set(const std::filesystem::path& p) {
  std::set<std::string> out;
  for (auto& l : read_lines(p)) out.insert(to_lower(l));
  return out;
}

// Assigns values by name so extraction code does not depend on slot order.
class Slots {
 public:
  explicit Slots(const FeatureSchema& schema) : values_(schema.size(), Missing{}) {
    for (std::size_t i = 0; i < schema.size(); ++i) index_.emplace(schema[i].name, i);
  }
  void set(const std::string& name, double v) { values_.at(index_.at(name)) = v; }
  void set_bool(const std::string& name, bool v) { set(name, v ? 1.0 : 0.0); }
  void set_token(const std::string& name, std::string v) {
    if (v.empty()) return;
    values_.at(index_.at(name)) = std::move(v);
  }
  template <typename T>
  void set_opt(const std::string& name, const std::optional<T>& v) {
    if (v) set(name, static_cast<double>(*v));
  }
  FeatureVector take() { return FeatureVector{std::move(values_)}; }

 private:
  std::vector<FeatureValue> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

bool contains_any(std::string_view hay, std::initializer_list<std::string_view> needles) {
  for (auto n : needles)
    if (hay.find(n) != std::string_view::npos) return true;
  return false;
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + needle.size())) ++n;
  return n;
}

double shannon_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  std::map<char, int> freq;
  for (char c : s) ++freq[c];
  double h = 0.0;
  for (auto& [c, k] : freq) {
    double p = static_cast<double>(k) / static_cast<double>(s.size());
    h -= p * std::log2(p);
  }
  return h;
}

// Host of an href, or "" for relative/non-network links.
std::string href_host(std::string_view href) {
  auto h = trim(href);
  if (h.starts_with("//")) h = "http:" + h;
  if (h.find("://") == std::string::npos) return "";
  try {
    return parse_url(h).host;
  } catch (const UrlError&) {
    return "";
  }
}

}  // namespace

const FeatureSchema& oracle_schema() {
  static const FeatureSchema schema = build_schema();
  return schema;
}

json schema_to_json(const FeatureSchema& schema, std::string_view version) {
  json feats = json::array();
  for (auto& f : schema)
    feats.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"group", to_string(f.group)}});
  return json{{"version", version}, {"features", feats}};
}

FeatureSchema schema_from_json(const json& j) {
  FeatureSchema out;
  for (auto& f : j.at("features")) {
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    auto kind = f.at("kind").get<std::string>();
    if (kind == "B") spec.kind = FeatureKind::Boolean;
    else if (kind == "N") spec.kind = FeatureKind::Numeric;
    else if (kind == "C") spec.kind = FeatureKind::Categorical;
    else throw SchemaError("unknown feature kind " + kind);
    auto group = f.at("group").get<std::string>();
    static const std::map<std::string, FeatureGroup> groups = {{"ranking", FeatureGroup::Ranking},
                                                               {"dns", FeatureGroup::Dns},
                                                               {"url", FeatureGroup::Url},
                                                               {"whois", FeatureGroup::Whois},
                                                               {"content", FeatureGroup::Content}};
    auto it = groups.find(group);
    if (it == groups.end()) throw SchemaError("unknown feature group " + group);
    spec.group = it->second;
    out.push_back(std::move(spec));
  }
  return out;
}

void validate(const FeatureVector& v, const FeatureSchema& schema) {
  if (v.values.size() != schema.size())
    throw SchemaError("feature vector has " + std::to_string(v.values.size()) + " values, schema has " +
                      std::to_string(schema.size()));
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& val = v.values[i];
    if (is_missing(val)) continue;
    switch (schema[i].kind) {
      case FeatureKind::Categorical:
        if (!std::holds_alternative<std::string>(val)) throw SchemaError(schema[i].name + ": expected a token");
        break;
      case FeatureKind::Boolean: {
        auto* d = std::get_if<double>(&val);
        if (!d || (*d != 0.0 && *d != 1.0)) throw SchemaError(schema[i].name + ": expected 0/1");
        break;
      }
      case FeatureKind::Numeric: {
        auto* d = std::get_if<double>(&val);
        if (!d || !std::isfinite(*d)) throw SchemaError(schema[i].name + ": expected a finite number");
        break;
      }
    }
  }
}

FeaturizerLists FeaturizerLists::bundled() {
  FeaturizerLists l;
  l.cheap_tlds = load_set(data_dir() / "cheap_tlds.txt");
  l.cheap_registrars = load_set(data_dir() / "cheap_registrars.txt");
  l.free_email_domains = load_set(data_dir() / "free_email_providers.txt");
  return l;
}

Featurizer::Featurizer(const PublicSuffixList& psl, const WordSegmenter& words, FeaturizerLists lists)
    : psl_(&psl), words_(&words), lists_(std::move(lists)) {}

const Featurizer& Featurizer::bundled() {
  static const Featurizer f(PublicSuffixList::bundled(), WordSegmenter::bundled(), FeaturizerLists::bundled());
  return f;
}

std::size_t Featurizer::domain_subwords(std::string_view root_domain) const {
  auto suffix = psl_->public_suffix(root_domain);
  std::string label(root_domain);
  if (suffix.size() < label.size()) label = label.substr(0, label.size() - suffix.size() - 1);
  std::size_t total = 0;
  for (auto& part : split(label, '-')) {
    std::string clean;
    for (char c : to_lower(part))
      if (std::isalnum(static_cast<unsigned char>(c))) clean += c;
    total += words_->split(clean).count();
  }
  return total;
}

FeatureVector Featurizer::extract(const DomainSnapshot& snap) const {
  Slots f(oracle_schema());

  // Ranking
  const auto& r = snap.ranks;
  f.set_opt("majestic_refips", r.majestic_refips);
  f.set_opt("majestic_refsubnets", r.majestic_refsubnets);
  f.set_opt("majestic_tldrank", r.majestic_tldrank);
  f.set_opt("tranco", r.tranco);
  f.set_opt("majestic", r.majestic);
  f.set_opt("cisco", r.cisco);
  f.set_bool("in_tranco", r.tranco.has_value());
  f.set_bool("in_majestic", r.majestic.has_value());
  f.set_bool("in_cisco", r.cisco.has_value());
  f.set("rank_sources_count", static_cast<double>(r.tranco.has_value() + r.majestic.has_value() + r.cisco.has_value()));

  // URL (landing page)
  const std::string& page_url = snap.final_url.empty() ? snap.url : snap.final_url;
  std::string root;
  UrlParts url;
  bool url_ok = true;
  try {
    url = parse_url(page_url);
    root = is_ip_literal(url.host) ? url.host : psl_->registrable_domain(url.host);
  } catch (const UrlError&) {
    url_ok = false;
  }
  if (url_ok) {
    const bool ip = is_ip_literal(url.host);
    auto suffix = ip ? std::string() : psl_->public_suffix(url.host);
    f.set_token("tld", suffix);
    if (!ip) f.set_bool("cheap_tld", lists_.cheap_tlds.contains(suffix));
    if (!ip) f.set("domain_subwords", static_cast<double>(domain_subwords(root)));
    f.set_bool("url_has_hyphen", url.host.find('-') != std::string::npos);
    f.set_bool("url_has_digit", std::any_of(url.host.begin(), url.host.end(),
                                            [](unsigned char c) { return std::isdigit(c); }));
    auto labels = [](std::string_view h) { return std::count(h.begin(), h.end(), '.') + 1; };
    f.set("url_subdomain_count", ip ? 0.0 : static_cast<double>(labels(url.host) - labels(root)));
    f.set("url_length", static_cast<double>(page_url.size()));
    f.set("domain_length", static_cast<double>(root.size()));
    std::string label = root;
    if (!ip && suffix.size() < root.size()) label = root.substr(0, root.size() - suffix.size() - 1);
    f.set("domain_label_entropy", shannon_entropy(label));
    f.set("url_num_digits",
          static_cast<double>(std::count_if(url.host.begin(), url.host.end(), [](unsigned char c) { return std::isdigit(c); })));
    f.set("url_num_hyphens", static_cast<double>(std::count(url.host.begin(), url.host.end(), '-')));
    f.set_bool("url_is_https", url.scheme == "https");
    std::size_t depth = 0;
    auto path = url.path.substr(0, url.path.find_first_of("?#"));
    for (auto& seg : split(path, '/'))
      if (!seg.empty()) ++depth;
    f.set("url_path_depth", static_cast<double>(depth));
  }

  // DNS: an empty record map means no DNS capture, not zero records.
  if (!snap.dns.empty()) {
    auto records = [&](const char* type) -> const std::vector<std::string>& {
      static const std::vector<std::string> none;
      auto it = snap.dns.find(type);
      return it == snap.dns.end() ? none : it->second;
    };
    for (const char* type : {"MX", "CNAME", "DNAME", "HINFO", "AAAA", "NS", "RP", "SOA", "TXT", "A", "CAA"}) {
      std::string lower = to_lower(type);
      auto n = records(type).size();
      f.set_bool("dns_has_" + lower, n > 0);
      f.set("dns_num_" + lower, static_cast<double>(n));
    }
    std::size_t verification = 0;
    bool spf = false, dmarc = !records("DMARC").empty();
    for (auto& txt : records("TXT")) {
      auto t = to_lower(txt);
      if (contains_any(t, {"verification", "verify"}) || t.starts_with("ms=")) ++verification;
      if (t.starts_with("v=spf1")) spf = true;
      if (t.starts_with("v=dmarc1")) dmarc = true;
    }
    f.set("dns_domain_verification_count", static_cast<double>(verification));
    f.set_bool("dns_has_spf", spf);
    f.set_bool("dns_has_dmarc", dmarc);
    std::size_t total = 0;
    for (auto& [type, recs] : snap.dns) total += recs.size();
    f.set("dns_num_records_total", static_cast<double>(total));
    bool self_hosted = false;
    for (auto& mx : records("MX")) {
      // "10 mail.example.com." -> host is the last field.
      auto parts = split_whitespace(mx);
      if (parts.empty()) continue;
      auto host = to_lower(parts.back());
      while (!host.empty() && host.back() == '.') host.pop_back();
      if (!root.empty() && !host.empty() && psl_->registrable_domain(host) == root) self_hosted = true;
    }
    f.set_bool("dns_mx_self_hosted", self_hosted);
  }

  // WHOIS
  const auto& w = snap.whois;
  if (snap.fetched_at) {
    auto day = std::chrono::floor<std::chrono::days>(*snap.fetched_at);
    if (w.created) {
      double age = static_cast<double>((day - *w.created).count());
      f.set("domain_age", age);
      f.set_bool("domain_created_recently", age < 90.0);
    }
    if (w.expires) f.set("time_to_expiry", static_cast<double>((*w.expires - day).count()));
  }
  if (w.created && w.expires) f.set("registration_length", static_cast<double>((*w.expires - *w.created).count()));
  if (w.registrar) {
    auto reg = to_lower(trim(*w.registrar));
    f.set_token("registrar_name", reg);
    bool cheap = false;
    for (auto& c : lists_.cheap_registrars)
      if (reg.find(c) != std::string::npos) cheap = true;
    f.set_bool("is_cheap_registrar", cheap);
  }
  auto upper = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ::toupper);
    return trim(s);
  };
  if (w.registrar_country) f.set_token("registrar_country", upper(*w.registrar_country));
  if (w.registrant_country) f.set_token("registrant_country", upper(*w.registrant_country));
  if (w.registrar_country && w.registrant_country)
    f.set_bool("registrant_matches_registrar_country", upper(*w.registrar_country) == upper(*w.registrant_country));
  if (w.privacy) f.set_bool("privacy_protected", *w.privacy);
  if (w.registrant_email_domain)
    f.set_bool("free_email_provider", lists_.free_email_domains.contains(to_lower(trim(*w.registrant_email_domain))));
  f.set_bool("whois_available", w.created || w.expires || w.registrar || w.registrar_country ||
                                     w.registrant_country || w.privacy || w.registrant_email_domain);

  // Content
  if (!snap.html.empty()) {
    const auto doc = html::parse(snap.html);
    const std::string lower_html = to_lower(snap.html);
    const std::string text = to_lower(doc.visible_text);

    std::size_t links = 0, internal = 0, external = 0, external_http = 0, with_ip = 0;
    std::size_t mailto = 0, tel = 0, whatsapp = 0;
    bool facebook = false, twitter = false, instagram = false, youtube = false, pinterest = false, tiktok = false;
    bool contact = false, review_linked = false, app_store = false, work_with_us = false, telegram = false;
    bool privacy = false, terms = false, refund = false, about = false;
    std::size_t headings = 0, scripts = 0, external_scripts = 0, forms = 0, inputs = 0, metas = 0, imgs = 0,
                iframes = 0;
    bool password = false;
    std::set<std::string> classes;
    std::size_t title_len = 0;
    bool title_seen = false;

    for (const auto& tag : doc.tags) {
      if (tag.closing) continue;
      const auto& name = tag.name;
      if (auto it = tag.attrs.find("class"); it != tag.attrs.end())
        for (auto& c : split_whitespace(it->second)) classes.insert(c);
      if (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6') ++headings;
      else if (name == "img") ++imgs;
      else if (name == "iframe") ++iframes;
      else if (name == "form") ++forms;
      else if (name == "meta") ++metas;
      else if (name == "input") {
        ++inputs;
        if (auto it = tag.attrs.find("type"); it != tag.attrs.end() && to_lower(it->second) == "password")
          password = true;
      } else if (name == "script") {
        ++scripts;
        if (auto it = tag.attrs.find("src"); it != tag.attrs.end()) {
          auto host = href_host(it->second);
          if (!host.empty() && (is_ip_literal(host) || psl_->registrable_domain(host) != root)) ++external_scripts;
        }
      } else if (name == "title" && !title_seen) {
        title_seen = true;
        title_len = tag.inner_text.size();
      } else if (name == "a") {
        auto it = tag.attrs.find("href");
        if (it == tag.attrs.end()) continue;
        ++links;
        const std::string href = to_lower(trim(it->second));
        const std::string anchor = to_lower(tag.inner_text);
        auto mentions = [&](std::initializer_list<std::string_view> words) {
          return contains_any(href, words) || contains_any(anchor, words);
        };
        if (href.starts_with("mailto:")) {
          ++mailto;
          continue;
        }
        if (href.starts_with("tel:")) {
          ++tel;
          continue;
        }
        if (href.starts_with("whatsapp:")) {
          ++whatsapp;
          continue;
        }
        if (href.starts_with("javascript:") || href.starts_with("#")) continue;
        if (mentions({"contact"})) contact = true;
        if (mentions({"career", "jobs", "work with us", "work-with-us", "join our team", "join-our-team"}))
          work_with_us = true;
        if (mentions({"privacy"})) privacy = true;
        if (mentions({"terms", "conditions", "tos"})) terms = true;
        if (mentions({"refund", "return policy", "returns"})) refund = true;
        if (mentions({"about"})) about = true;

        auto host = href_host(href);
        if (host.empty()) {
          ++internal;
          continue;
        }
        if (is_ip_literal(host)) {
          ++with_ip;
          ++external;
          if (href.starts_with("http://")) ++external_http;
          continue;
        }
        const auto dom = psl_->registrable_domain(host);
        if (dom == "wa.me" || dom == "whatsapp.com") {
          ++whatsapp;
          continue;
        }
        if (dom == root) {
          ++internal;
          continue;
        }
        ++external;
        if (href.starts_with("http://")) ++external_http;
        if (dom == "facebook.com" || dom == "fb.com") facebook = true;
        if (dom == "twitter.com" || dom == "x.com") twitter = true;
        if (dom == "instagram.com") instagram = true;
        if (dom == "youtube.com" || dom == "youtu.be") youtube = true;
        if (dom == "pinterest.com") pinterest = true;
        if (dom == "tiktok.com") tiktok = true;
        if (dom == "t.me" || dom == "telegram.me" || dom == "telegram.org") telegram = true;
        if (dom == "trustpilot.com" || dom == "yelp.com" || dom == "sitejabber.com" || dom == "reviews.io" ||
            dom == "bbb.org" || dom == "feefo.com" || dom == "resellerratings.com")
          review_linked = true;
        if (host == "apps.apple.com" || host == "itunes.apple.com" || host == "play.google.com") app_store = true;
      }
    }

    f.set_bool("facebook_profile_linked", facebook);
    f.set_bool("twitter_profile_linked", twitter);
    f.set_bool("instagram_profile_linked", instagram);
    f.set_bool("youtube_profile_linked", youtube);
    f.set_bool("pinterest_profile_linked", pinterest);
    f.set_bool("tiktok_profile_linked", tiktok);
    f.set_bool("presence_of_contact_link", contact);
    f.set("num_mailto_links", static_cast<double>(mailto));
    f.set("num_telephone_links", static_cast<double>(tel));
    f.set("num_whatsapp_links", static_cast<double>(whatsapp));
    f.set_bool("review_system_linked", review_linked);
    f.set_bool("has_app_store", app_store);
    f.set_bool("has_review_widget", contains_any(lower_html, {"trustpilot-widget", "yotpo", "judge.me", "stamped.io",
                                                              "reviews-widget", "review-widget", "okendo", "loox"}));
    f.set("num_links", static_cast<double>(links));
    f.set("num_internal_links", static_cast<double>(internal));
    f.set("num_external_links", static_cast<double>(external));
    f.set("num_img_tags", static_cast<double>(imgs));
    f.set("num_iframe_tags", static_cast<double>(iframes));
    f.set("num_external_http_links", static_cast<double>(external_http));
    f.set("num_links_with_ip", static_cast<double>(with_ip));
    f.set_bool("presence_work_with_us_link", work_with_us);
    f.set_bool("presence_cookie_consent_notice",
               contains_any(lower_html, {"cookie consent", "cookie-consent", "cookieconsent", "we use cookies",
                                         "accept cookies", "accept all cookies", "cookiebot", "onetrust"}));
    f.set_bool("trustpilot_present", lower_html.find("trustpilot") != std::string::npos);
    f.set("num_h1_h6_tags", static_cast<double>(headings));
    f.set("num_css_classes", static_cast<double>(classes.size()));
    f.set("num_script_tags", static_cast<double>(scripts));
    f.set("num_external_scripts", static_cast<double>(external_scripts));
    f.set("num_forms", static_cast<double>(forms));
    f.set("num_input_tags", static_cast<double>(inputs));
    f.set_bool("has_password_input", password);
    f.set("num_meta_tags", static_cast<double>(metas));
    f.set("title_length", static_cast<double>(title_len));
    f.set("html_length", static_cast<double>(snap.html.size()));
    f.set("num_words", static_cast<double>(split_whitespace(doc.visible_text).size()));
    f.set_bool("presence_privacy_policy_link", privacy);
    f.set_bool("presence_terms_link", terms);
    f.set_bool("presence_refund_policy_link", refund);
    f.set_bool("presence_about_link", about);
    std::size_t currency = 0;
    for (std::string_view sym : {"$", "€", "£", "¥", " usd", " eur"}) currency += count_occurrences(text, sym);
    f.set("num_currency_mentions", static_cast<double>(currency));
    std::size_t discount = 0;
    for (std::string_view w : {"% off", "discount", "clearance", "sale"}) discount += count_occurrences(text, w);
    f.set("num_discount_mentions", static_cast<double>(discount));
    f.set_bool("telegram_link_present", telegram);
  }

  return f.take();
}

std::string features_to_csv(const FeatureTable& table, const FeatureSchema& schema) {
  if (table.keys.size() != table.vectors.size()) throw SchemaError("features table: key/vector count mismatch");
  std::string out = "root_domain";
  for (auto& s : schema) out += "," + s.name;
  out += "\n";
  for (std::size_t r = 0; r < table.vectors.size(); ++r) {
    validate(table.vectors[r], schema);
    out += csv_escape(table.keys[r]);
    for (auto& v : table.vectors[r].values) {
      out += ",";
      if (auto* d = std::get_if<double>(&v)) out += format_double(*d);
      else if (auto* s = std::get_if<std::string>(&v)) out += csv_escape(*s);
    }
    out += "\n";
  }
  return out;
}

FeatureTable features_from_csv(std::string_view csv, const FeatureSchema& schema) {
  FeatureTable table;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    auto cells = parse_csv_line(line);
    if (no == 1) {
      if (cells.size() != schema.size() + 1 || cells[0] != "root_domain")
        throw SchemaError("features.csv header does not match the feature schema");
      for (std::size_t i = 0; i < schema.size(); ++i)
        if (cells[i + 1] != schema[i].name)
          throw SchemaError("features.csv column " + std::to_string(i + 1) + " is '" + cells[i + 1] + "', expected '" +
                            schema[i].name + "'");
      continue;
    }
    if (cells.size() != schema.size() + 1) throw ParseError("wrong number of cells", no);
    FeatureVector v;
    v.values.reserve(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& c = cells[i + 1];
      if (c.empty()) {
        v.values.emplace_back(Missing{});
      } else if (schema[i].kind == FeatureKind::Categorical) {
        v.values.emplace_back(c);
      } else {
        try {
          std::size_t used = 0;
          double d = std::stod(c, &used);
          if (used != c.size()) throw std::invalid_argument(c);
          v.values.emplace_back(d);
        } catch (const std::exception&) {
          throw ParseError("not a number in column " + schema[i].name + ": " + c, no);
        }
      }
    }
    validate(v, schema);
    table.keys.push_back(cells[0]);
    table.vectors.push_back(std::move(v));
  }
  return table;
}

}  // namespace scamrank
