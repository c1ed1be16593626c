#include "lector/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "lector/discourse.hpp"

namespace lector {

namespace {

constexpr std::array<std::string_view, 8> kFiller = {"of", "the", "and", "for", "in", "with", "on", "to"};
constexpr std::size_t kBodyNouns = 6;
constexpr double kAttentionBoost = 3.0;
constexpr double kCourseAlignment = 2.0;
constexpr double kOccurrenceNoise = 0.15;
constexpr double kProfileMix = 0.7;
constexpr double kProfileSharpness = 2.0;
constexpr std::size_t kProfileCandidates = 10;
constexpr std::uint64_t kLogStream = 0x9e3779b97f4a7c15ULL;

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    bool chance(double p) { return uniform() < p; }
    std::mt19937_64& engine() { return rng_; }

    std::size_t categorical(const Vector& p) {
        const double r = uniform(0.0, p.sum());
        double acc = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            acc += p(i);
            if (r < acc) {
                return static_cast<std::size_t>(i);
            }
        }
        return static_cast<std::size_t>(p.size() - 1);
    }

private:
    std::mt19937_64 rng_;
};

// Unit vector orthogonal to the course direction e0.
Vector off_axis_unit(Sampler& rng, std::size_t dim) {
    Vector v(static_cast<Eigen::Index>(dim));
    v(0) = 0.0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        v(i) = rng.normal();
    }
    return v.normalized();
}

Vector jitter(const Vector& base, Sampler& rng) {
    Vector v = base;
    const double scale = kOccurrenceNoise / std::sqrt(static_cast<double>(base.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) += scale * rng.normal();
    }
    return v.normalized();
}

Matrix as_float32(const Matrix& m) {
    return m.cast<float>().cast<double>();
}

std::string term_name(std::size_t i, std::size_t vocab) {
    const auto width = std::to_string(vocab - 1).size();
    auto digits = std::to_string(i);
    return "term" + std::string(width - digits.size(), '0') + digits;
}

Token noun(const std::string& s) {
    return {s, Pos::Noun};
}

Token filler(Sampler& rng) {
    return {std::string(kFiller[rng.index(kFiller.size())]), Pos::Other};
}

Vector zscore(const Vector& v) {
    const double mean = v.mean();
    const double sd = std::sqrt((v.array() - mean).square().mean());
    if (!(sd > 0.0)) {
        return Vector::Zero(v.size());
    }
    return (v.array() - mean) / sd;
}

Vector softmax(const Vector& v) {
    const Vector e = (v.array() - v.maxCoeff()).exp();
    return e / e.sum();
}

double correlation(const Vector& a, const Vector& b) {
    const Vector za = zscore(a);
    const Vector zb = zscore(b);
    return za.dot(zb) / static_cast<double>(a.size());
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + file.string());
    }
    out << text;
}

}  // namespace

void SynthSpec::validate() const {
    if (deck_count < 1 || slide_count < 1) {
        throw DomainError("synth needs at least one deck and one slide");
    }
    if (vocab_size < 1 || planted_count() > vocab_size) {
        throw DomainError("planted topics must be a subset of the vocabulary");
    }
    if (dim < 2) {
        throw DomainError("synth embedding dim must be at least 2");
    }
    if (!(at_risk_fraction >= 0.0 && at_risk_fraction <= 1.0)) {
        throw DomainError("at_risk_fraction must lie in [0, 1]");
    }
    if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
        throw DomainError("signal_strength must lie in [0, 1]");
    }
    for (double s : planted_salience) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw DomainError("planted salience must be finite and non-negative");
        }
    }
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
    spec.validate();
    Sampler rng(spec.seed);
    const double s = spec.signal_strength;
    const auto vocab = spec.vocab_size;

    std::vector<std::string> words(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
        words[i] = term_name(i, vocab);
    }
    std::vector<std::size_t> order(vocab);
    for (std::size_t i = 0; i < vocab; ++i) {
        order[i] = i;
    }
    std::shuffle(order.begin(), order.end(), rng.engine());
    // salience[w] > 0 marks planted words
    std::vector<double> salience(vocab, 0.0);
    std::vector<std::size_t> planted(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.planted_count()));
    for (std::size_t k = 0; k < planted.size(); ++k) {
        salience[planted[k]] = spec.planted_salience[k];
    }

    std::vector<Vector> base(vocab);
    for (std::size_t w = 0; w < vocab; ++w) {
        Vector v = off_axis_unit(rng, spec.dim);
        v(0) = kCourseAlignment * s * salience[w];
        base[w] = v.normalized();
    }

    // Body noun slots: every vocabulary word once, the rest drawn uniformly.
    const std::size_t slides_total = spec.deck_count * spec.slide_count;
    const std::size_t per_slide = std::max(kBodyNouns, (vocab + slides_total - 1) / slides_total);
    std::vector<std::size_t> slots(slides_total * per_slide);
    for (std::size_t i = 0; i < slots.size(); ++i) {
        slots[i] = i < vocab ? i : rng.index(vocab);
    }
    std::shuffle(slots.begin(), slots.end(), rng.engine());

    SynthCorpus out;
    std::vector<SlideDeck> decks;
    std::size_t slot = 0;
    for (std::size_t d = 0; d < spec.deck_count; ++d) {
        SlideDeck deck;
        deck.deck_id = "deck" + std::string(d < 10 ? "0" : "") + std::to_string(d);
        TensorBundle bundle{deck.deck_id, spec.dim, {}};
        std::map<std::string, Vector, std::less<>> filler_base;

        for (std::size_t i = 0; i < spec.slide_count; ++i) {
            Slide slide;
            slide.index = static_cast<int>(i);
            std::vector<std::size_t> noun_ids;  // vocabulary id per token; fillers hold vocab
            auto add = [&](std::vector<Token>& region, std::size_t w) {
                region.push_back(noun(words[w]));
                noun_ids.push_back(w);
            };
            auto add_filler = [&](std::vector<Token>& region) {
                region.push_back(filler(rng));
                noun_ids.push_back(vocab);
            };

            if (i == 0) {
                for (std::size_t k = 0; k < planted.size(); ++k) {
                    if (k > 0) add_filler(slide.title);
                    add(slide.title, rng.chance(s) ? planted[k] : rng.index(vocab));
                }
            } else {
                const bool use_planted = !planted.empty() && rng.chance(s);
                add(slide.title, use_planted ? planted[rng.index(planted.size())] : rng.index(vocab));
            }
            for (std::size_t k = 0; k < per_slide; ++k) {
                add(slide.body, slots[slot++]);
                add_filler(slide.body);
            }

            const auto n = static_cast<Eigen::Index>(slide.size());
            SlideTensors t;
            t.embeddings.resize(n, static_cast<Eigen::Index>(spec.dim));
            Vector boost = Vector::Zero(n);
            for (Eigen::Index r = 0; r < n; ++r) {
                const auto w = noun_ids[static_cast<std::size_t>(r)];
                if (w < vocab) {
                    t.embeddings.row(r) = jitter(base[w], rng).transpose();
                    boost(r) = kAttentionBoost * s * salience[w];
                } else {
                    const auto& surface = slide.at(static_cast<std::size_t>(r)).surface;
                    auto it = filler_base.find(surface);
                    if (it == filler_base.end()) {
                        it = filler_base.emplace(surface, off_axis_unit(rng, spec.dim)).first;
                    }
                    t.embeddings.row(r) = jitter(it->second, rng).transpose();
                }
            }
            Matrix logits(n, n);
            for (Eigen::Index r = 0; r < n; ++r) {
                for (Eigen::Index c = 0; c < n; ++c) {
                    logits(r, c) = rng.normal() + boost(c);
                }
            }
            t.attention = as_float32(softmax_rows(logits, 1.0));
            t.embeddings = as_float32(t.embeddings);
            bundle.slides.push_back(std::move(t));
            deck.slides.push_back(std::move(slide));
        }
        out.bundles.emplace(deck.deck_id, std::move(bundle));
        decks.push_back(std::move(deck));
    }
    out.corpus = assemble_corpus(std::move(decks));
    for (auto w : planted) {
        out.planted.push_back(words[w]);
    }
    std::sort(out.planted.begin(), out.planted.end());
    out.gold = make_gold(out.planted);
    return out;
}

void write_synth_corpus(const SynthCorpus& synth, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "corpus");
    std::filesystem::create_directories(dir / "bundles");
    for (const auto& deck : synth.corpus) {
        std::ofstream out(dir / "corpus" / (deck.deck_id + ".slides.jsonl"), std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write deck " + deck.deck_id);
        }
        write_deck(deck, out);
    }
    for (const auto& [id, bundle] : synth.bundles) {
        write_tensor_bundle(bundle, dir / "bundles" / (id + ".tensors.bin"));
    }
    std::string gold;
    for (const auto& p : synth.planted) {
        gold += p + "\n";
    }
    write_text(dir / "gold.txt", gold);
}

SynthLogs generate_logs(const SynthSpec& spec, const SlideTopicMatrix& m) {
    spec.validate();
    if (m.topics.empty() || m.slide_count == 0) {
        throw DomainError("generate_logs needs a matrix with at least one topic and slide");
    }
    Sampler rng(spec.seed ^ kLogStream);
    const double s = spec.signal_strength;
    SynthLogs out;

    const auto candidates = topn(keyphrase_scores(m), m.topics, std::min(kProfileCandidates, m.topics.size())).topics;
    auto column = [&](std::size_t j) -> Vector { return m.values.col(static_cast<Eigen::Index>(j)); };
    out.topic_a = candidates.front();
    double best_var = -1.0;
    for (auto j : candidates) {
        const Vector c = column(j);
        const double var = (c.array() - c.mean()).square().mean();
        if (var > best_var) {
            best_var = var;
            out.topic_a = j;
        }
    }
    out.topic_b = out.topic_a;
    double lowest = 2.0;
    for (auto j : candidates) {
        if (j == out.topic_a) continue;
        const double r = correlation(column(out.topic_a), column(j));
        if (r < lowest) {
            lowest = r;
            out.topic_b = j;
        }
    }

    struct DeckProfile {
        std::string id;
        Vector at_risk;
        Vector other;
    };
    std::vector<DeckProfile> decks;
    for (const auto& id : m.deck_ids) {
        const auto [first, count] = m.deck_rows(id);
        if (count == 0) continue;
        auto rows = [&](std::size_t j) -> Vector {
            return m.values.col(static_cast<Eigen::Index>(j)).segment(static_cast<Eigen::Index>(first),
                                                                     static_cast<Eigen::Index>(count));
        };
        decks.push_back({id, softmax(kProfileSharpness * zscore(rows(out.topic_a))),
                         softmax(kProfileSharpness * zscore(rows(out.topic_b)))});
    }

    const std::size_t n = spec.student_count;
    const auto at_risk_count = static_cast<std::size_t>(std::llround(spec.at_risk_fraction * static_cast<double>(n)));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<bool> risk(n, false);
    for (std::size_t i = 0; i < at_risk_count; ++i) risk[perm[i]] = true;

    using namespace std::chrono;
    const sys_days first_day = year{2024} / April / 8;
    for (std::size_t d = 0; d < decks.size(); ++d) {
        const auto day = first_day + days{7 * static_cast<int>(d)};
        out.schedule.push_back({day + hours{9}, day + hours{10} + minutes{30}});
    }

    const auto width = std::to_string(n).size();
    for (std::size_t u = 0; u < n; ++u) {
        auto digits = std::to_string(u + 1);
        const std::string user = "u" + std::string(width - digits.size(), '0') + digits;
        if (risk[u]) {
            out.grades[user] = rng.chance(0.5) ? Grade::D : Grade::F;
        } else {
            static constexpr Grade passing[] = {Grade::A, Grade::B, Grade::C};
            out.grades[user] = passing[rng.index(3)];
        }

        for (std::size_t d = 0; d < decks.size(); ++d) {
            const auto& deck = decks[d];
            const auto slides = deck.at_risk.size();
            Vector random(slides);
            for (Eigen::Index i = 0; i < random.size(); ++i) {
                random(i) = -std::log(1.0 - rng.uniform());
            }
            random /= random.sum();
            const Vector pref = (1.0 - kProfileMix * s) * random + kProfileMix * s * (risk[u] ? deck.at_risk : deck.other);

            const auto& window = out.schedule[d];
            Timestamp t = rng.chance(0.5) ? window.start + seconds{rng.integer(0, 600)}
                                          : window.start + hours{10} + seconds{rng.integer(0, 10800)};
            int page = 1;
            auto emit = [&](Operation op, int p, Timestamp at) {
                out.events.push_back({user, deck.id, op, p, at});
            };
            emit(Operation::Open, page, t);
            t += seconds{rng.integer(2, 5)};
            const int visits = rng.integer(40, 80);
            for (int v = 0; v < visits; ++v) {
                page = static_cast<int>(rng.categorical(pref)) + 1;
                const double r = rng.uniform();
                const Operation op = r < 0.6 ? Operation::Next : r < 0.8 ? Operation::Prev : Operation::PageJump;
                emit(op, page, t);
                const int dwell = rng.integer(20, 120);
                if (rng.chance(0.08)) {
                    const double a = rng.uniform();
                    const Operation extra = a < 0.5   ? Operation::AddMarker
                                            : a < 0.7 ? Operation::AddBookmark
                                            : a < 0.9 ? Operation::AddMemo
                                                      : Operation::Search;
                    emit(extra, page, t + seconds{dwell / 2});
                }
                t += seconds{dwell};
            }
            emit(Operation::Close, page, t);
        }
    }
    sort_events(out.events);
    return out;
}

std::string grades_csv(const std::map<std::string, Grade>& grades) {
    std::string out = "user_id,grade\n";
    for (const auto& [user, g] : grades) {
        out += user;
        out += ',';
        out += grade_name(g);
        out += '\n';
    }
    return out;
}

std::string schedule_json(const std::vector<TimeWindow>& schedule) {
    auto j = nlohmann::ordered_json::array();
    for (const auto& w : schedule) {
        j.push_back({{"start", format_timestamp(w.start)}, {"end", format_timestamp(w.end)}});
    }
    return j.dump(2) + "\n";
}

void write_synth_logs(const SynthLogs& logs, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "events.csv", events_csv(logs.events));
    write_text(dir / "grades.csv", grades_csv(logs.grades));
    write_text(dir / "schedule.json", schedule_json(logs.schedule));
}

}  // namespace lector
