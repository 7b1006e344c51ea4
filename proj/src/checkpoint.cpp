#include "hgnn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "hgnn/config.hpp"

namespace hgnn {

namespace {

constexpr const char* kHeader = "hgnn-checkpoint v1";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_section(std::ostream& out, const std::string& name, std::span<const double> values,
                   std::size_t rows, std::size_t cols) {
    out << "section " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << ' ';
            out << fmt(values[r * cols + c]);
        }
        out << '\n';
    }
}

void write_rows(std::ostream& out, const std::string& name, const std::vector<Vector>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Vector flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    write_section(out, name, flat, rows.size(), cols);
}

struct Section {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vector values;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string line() {
        std::string s;
        if (!std::getline(in_, s)) fail("unexpected end of file");
        ++line_no_;
        return s;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("checkpoint line " + std::to_string(line_no_) + ": " + what);
    }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
};

std::vector<Vector> to_rows(const Section& s) {
    std::vector<Vector> out;
    for (std::size_t r = 0; r < s.rows; ++r) {
        out.emplace_back(s.values.begin() + static_cast<std::ptrdiff_t>(r * s.cols),
                         s.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * s.cols));
    }
    return out;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
    out << kHeader << '\n';
    out << "config " << to_json(ckpt.model.config).dump() << '\n';
    for (const auto& v : parameter_views(ckpt.model.params, ckpt.model.config)) {
        write_section(out, v.name, v.values, v.rows, v.cols);
    }
    write_section(out, "standardize.mean", ckpt.stats.mean, ckpt.stats.mean.empty() ? 0 : 1,
                  ckpt.stats.mean.size());
    write_section(out, "standardize.stddev", ckpt.stats.stddev, ckpt.stats.stddev.empty() ? 0 : 1,
                  ckpt.stats.stddev.size());
    const EmbeddingSet& e = ckpt.embeddings;
    write_rows(out, "embedding.task_raw", e.raw_task);
    write_rows(out, "embedding.task_updated", e.updated_task);
    write_rows(out, "embedding.class_raw", e.raw_class);
    write_rows(out, "embedding.class_updated", e.updated_class);
    if (e.task_attention) {
        write_section(out, "attention.task", e.task_attention->values(), e.task_attention->rows(),
                      e.task_attention->cols());
    }
    if (e.class_attention) {
        write_section(out, "attention.class", e.class_attention->values(), e.class_attention->rows(),
                      e.class_attention->cols());
    }
    out << "end\n";
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    save_checkpoint(out, ckpt);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(std::istream& in) {
    Reader r(in);
    if (r.line() != kHeader) r.fail("missing header '" + std::string(kHeader) + "'");

    const std::string cfg_line = r.line();
    if (cfg_line.rfind("config ", 0) != 0) r.fail("expected 'config <json>'");
    ModelConfig config;
    try {
        config = model_config_from_json(nlohmann::json::parse(cfg_line.substr(7)));
    } catch (const nlohmann::json::exception& e) {
        r.fail(std::string("bad config JSON: ") + e.what());
    } catch (const UsageError& e) {
        r.fail(e.what());
    }

    std::map<std::string, Section> sections;
    for (;;) {
        const std::string head = r.line();
        if (head == "end") break;
        std::istringstream hs(head);
        std::string kw, name;
        Section s;
        if (!(hs >> kw >> name >> s.rows >> s.cols) || kw != "section") {
            r.fail("expected 'section <name> <rows> <cols>' or 'end'");
        }
        if (sections.count(name)) r.fail("duplicate section " + name);
        s.values.reserve(s.rows * s.cols);
        for (std::size_t row = 0; row < s.rows; ++row) {
            std::istringstream ls(r.line());
            for (std::size_t c = 0; c < s.cols; ++c) {
                std::string tok;
                if (!(ls >> tok)) r.fail("section " + name + ": too few values");
                try {
                    std::size_t used = 0;
                    s.values.push_back(std::stod(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    r.fail("section " + name + ": bad number '" + tok + "'");
                }
            }
            std::string extra;
            if (ls >> extra) r.fail("section " + name + ": too many values");
        }
        sections.emplace(name, std::move(s));
    }

    Checkpoint ckpt;
    ckpt.model = make_model(config, 0);
    for (auto& v : parameter_views(ckpt.model.params, config)) {
        auto it = sections.find(v.name);
        if (it == sections.end()) throw ParseError("checkpoint: missing section " + v.name);
        if (it->second.rows != v.rows || it->second.cols != v.cols) {
            throw ParseError("checkpoint: section " + v.name + " has shape " +
                             std::to_string(it->second.rows) + "x" + std::to_string(it->second.cols) +
                             ", expected " + std::to_string(v.rows) + "x" + std::to_string(v.cols));
        }
        std::copy(it->second.values.begin(), it->second.values.end(), v.values.begin());
    }
    auto optional_rows = [&](const std::string& name) {
        auto it = sections.find(name);
        return it == sections.end() ? std::vector<Vector>{} : to_rows(it->second);
    };
    auto mean = optional_rows("standardize.mean");
    auto sd = optional_rows("standardize.stddev");
    if (!mean.empty()) ckpt.stats.mean = mean.front();
    if (!sd.empty()) ckpt.stats.stddev = sd.front();
    if (ckpt.stats.mean.size() != ckpt.stats.stddev.size()) {
        throw ParseError("checkpoint: standardize.mean and standardize.stddev differ in length");
    }
    ckpt.embeddings.raw_task = optional_rows("embedding.task_raw");
    ckpt.embeddings.updated_task = optional_rows("embedding.task_updated");
    ckpt.embeddings.raw_class = optional_rows("embedding.class_raw");
    ckpt.embeddings.updated_class = optional_rows("embedding.class_updated");
    for (const char* name : {"attention.task", "attention.class"}) {
        auto it = sections.find(name);
        if (it == sections.end()) continue;
        if (it->second.rows == 0 || it->second.cols == 0) throw ParseError(std::string("checkpoint: empty ") + name);
        Matrix a(it->second.rows, it->second.cols);
        std::copy(it->second.values.begin(), it->second.values.end(), a.values().begin());
        (std::string(name) == "attention.task" ? ckpt.embeddings.task_attention
                                               : ckpt.embeddings.class_attention) = std::move(a);
    }
    if (config.uses_task_embedding() && ckpt.embeddings.updated_task.size() != config.num_tasks) {
        throw ParseError("checkpoint: expected " + std::to_string(config.num_tasks) + " task embeddings");
    }
    if (config.uses_class_embedding() &&
        ckpt.embeddings.updated_class.size() != config.num_tasks * config.num_classes) {
        throw ParseError("checkpoint: expected " + std::to_string(config.num_tasks * config.num_classes) +
                         " class embeddings");
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_checkpoint(in);
}

}  // namespace hgnn
