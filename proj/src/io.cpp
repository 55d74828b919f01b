#include "mids/io.hpp"

#include <fstream>
#include <sstream>

namespace mids::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

const json& field(const json& doc, const char* name) {
    if (!doc.is_object() || !doc.contains(name)) parse_error(std::string("missing field '") + name + "'");
    return doc.at(name);
}

double number(const json& v, const char* name) {
    if (!v.is_number()) parse_error(std::string("non-numeric entry in '") + name + "'");
    return v.get<double>();
}

}  // namespace

json to_json(const Matrix& M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json to_json_vector(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json to_json_stacked(const Vector& x, std::size_t m) {
    json rows = json::array();
    const auto mm = static_cast<Eigen::Index>(m);
    for (Eigen::Index a = 0; a < x.size() / mm; ++a) rows.push_back(to_json_vector(x.segment(a * mm, mm)));
    return rows;
}

Matrix matrix_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.empty()) parse_error(std::string("'") + name + "' must be a non-empty array of arrays");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) parse_error(std::string("'") + name + "' must be an array of arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(ErrorCode::DimensionMismatch, std::string("ragged rows in '") + name + "'");
        }
        for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = number(row[static_cast<std::size_t>(c)], name);
    }
    return M;
}

Vector vector_from_json(const json& j, const char* name) {
    if (!j.is_array()) parse_error(std::string("'") + name + "' must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], name);
    return v;
}

Vector stacked_from_json(const json& j, std::size_t n, std::size_t m, const char* name) {
    if (!j.is_array()) parse_error(std::string("'") + name + "' must be an array");
    if (!j.empty() && j[0].is_array()) {
        if (j.size() != n) {
            throw Error(ErrorCode::DimensionMismatch, std::string("'") + name + "' must hold " + std::to_string(n) + " agents");
        }
        Vector x(static_cast<Eigen::Index>(n * m));
        for (std::size_t a = 0; a < n; ++a) {
            const auto& row = j[a];
            if (!row.is_array() || row.size() != m) {
                throw Error(ErrorCode::DimensionMismatch, std::string("each entry of '") + name + "' must have " + std::to_string(m) + " issues");
            }
            for (std::size_t p = 0; p < m; ++p) x(static_cast<Eigen::Index>(a * m + p)) = number(row[p], name);
        }
        return x;
    }
    Vector x = vector_from_json(j, name);
    if (static_cast<std::size_t>(x.size()) != n * m) {
        throw Error(ErrorCode::DimensionMismatch, std::string("'") + name + "' must have n*m entries");
    }
    return x;
}

ModelCandidate model_from_json(const json& doc) {
    ModelCandidate c;
    c.W = matrix_from_json(field(doc, "W"), "W");
    c.lambda = vector_from_json(field(doc, "Lambda"), "Lambda");
    c.C = matrix_from_json(field(doc, "C"), "C");
    if (doc.contains("D") && !doc.at("D").is_null()) c.D = matrix_from_json(doc.at("D"), "D");
    const auto n = static_cast<std::size_t>(c.W.rows());
    const auto m = static_cast<std::size_t>(c.C.rows());
    if (doc.contains("n") && doc.at("n").get<std::size_t>() != n) {
        throw Error(ErrorCode::DimensionMismatch, "field n does not match W");
    }
    if (doc.contains("m") && doc.at("m").get<std::size_t>() != m) {
        throw Error(ErrorCode::DimensionMismatch, "field m does not match C");
    }
    c.u = stacked_from_json(field(doc, "u"), n, m, "u");
    return c;
}

json model_to_json(const ModelCandidate& model) {
    const auto m = static_cast<std::size_t>(model.C.rows());
    json doc;
    doc["n"] = model.W.rows();
    doc["m"] = m;
    doc["W"] = to_json(model.W);
    doc["Lambda"] = to_json_vector(model.lambda);
    doc["C"] = to_json(model.C);
    if (model.D) doc["D"] = to_json(*model.D);
    doc["u"] = to_json_stacked(model.u, m);
    return doc;
}

IdentificationProblem identification_from_json(const json& doc) {
    IdentificationProblem p;
    p.W = matrix_from_json(field(doc, "W"), "W");
    p.lambda = vector_from_json(field(doc, "Lambda"), "Lambda");
    const auto n = static_cast<std::size_t>(p.W.rows());
    const json& u = field(doc, "u");
    if (doc.contains("m")) {
        p.m = doc.at("m").get<std::size_t>();
    } else if (u.is_array() && !u.empty() && u[0].is_array()) {
        p.m = u[0].size();
    } else {
        parse_error("cannot infer m: give 'm' or u as n arrays of m entries");
    }
    if (p.m == 0) parse_error("m must be positive");
    p.u = stacked_from_json(u, n, p.m, "u");

    const bool has_ss = doc.contains("steady_state");
    const bool has_obs = doc.contains("observations");
    if (has_ss == has_obs) parse_error("give exactly one of 'steady_state' or 'observations'");
    if (has_ss) {
        p.data = InfiniteHorizon{stacked_from_json(doc.at("steady_state"), n, p.m, "steady_state")};
    } else {
        FiniteHorizon fh;
        const json& obs = doc.at("observations");
        if (!obs.is_array()) parse_error("'observations' must be an array of states");
        for (const auto& x : obs) fh.observations.push_back(stacked_from_json(x, n, p.m, "observations"));
        p.data = std::move(fh);
    }
    return p;
}

json identification_to_json(const IdentificationProblem& p) {
    json doc;
    doc["m"] = p.m;
    doc["W"] = to_json(p.W);
    doc["Lambda"] = to_json_vector(p.lambda);
    doc["u"] = to_json_stacked(p.u, p.m);
    if (const auto* fin = std::get_if<FiniteHorizon>(&p.data)) {
        json obs = json::array();
        for (const auto& x : fin->observations) obs.push_back(to_json_stacked(x, p.m));
        doc["observations"] = std::move(obs);
    } else {
        doc["steady_state"] = to_json_stacked(std::get<InfiniteHorizon>(p.data).steady_state, p.m);
    }
    return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) parse_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        parse_error(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
    out << text;
}

}  // namespace mids::io
