#ifndef CAPDETAIL_SCENE_GRAPH_H_
#define CAPDETAIL_SCENE_GRAPH_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace capdetail {

struct ObjectRef {
  std::string id;
  std::string label;

  bool operator==(const ObjectRef&) const = default;
};

struct AttributePair {
  std::string object_id;
  std::string attribute;

  bool operator==(const AttributePair&) const = default;
};

struct RelationTriplet {
  std::string subject_id;
  std::string predicate;
  std::string object_id;

  bool operator==(const RelationTriplet&) const = default;
};

// How a relation triplet contributes to per-object relation counts.
// kSubjectOnly counts (s, p, o) toward s alone; kBothEndpoints counts it
// toward s and o, and a self-relation (s, p, s) once.
enum class RelationCounting { kSubjectOnly, kBothEndpoints };

// Objects, attribute pairs and relation triplets parsed from one caption.
//
// Instances are immutable and always valid: every attribute and relation
// endpoint names an existing object, object ids are unique, and attributes
// and relations have set semantics. Attribute and predicate strings are
// compared case-insensitively after whitespace collapsing; among strings
// that compare equal the lexicographically smallest spelling is kept, so the
// stored graph does not depend on input order.
//
// Storage is canonical: objects sorted by id, attributes by (object id,
// attribute key), relations by (subject id, predicate key, object id).
class SceneGraph {
 public:
  SceneGraph() = default;

  // Validates and canonicalizes. Throws Error with kMalformedDocument for
  // empty ids, labels, attributes or predicates; kDuplicateObjectId; and
  // kReferentialIntegrity for dangling endpoints.
  static SceneGraph Create(std::vector<ObjectRef> objects,
                           std::vector<AttributePair> attributes,
                           std::vector<RelationTriplet> relations);

  const std::vector<ObjectRef>& objects() const { return objects_; }
  const std::vector<AttributePair>& attributes() const { return attributes_; }
  const std::vector<RelationTriplet>& relations() const { return relations_; }

  bool empty() const { return objects_.empty(); }
  std::size_t edge_count() const {
    return attributes_.size() + relations_.size();
  }

  // nullptr when absent.
  const ObjectRef* FindObject(std::string_view id) const;

  bool operator==(const SceneGraph&) const = default;

 private:
  std::vector<ObjectRef> objects_;
  std::vector<AttributePair> attributes_;
  std::vector<RelationTriplet> relations_;
};

// Canonical graph document:
//   {"objects": [{"id", "label"}], "attributes": [{"object", "attribute"}],
//    "relations": [{"subject", "predicate", "object"}]}
// A missing "attributes" or "relations" array reads as empty.
SceneGraph ParseSceneGraph(std::string_view document);
SceneGraph SceneGraphFromJson(const nlohmann::json& document);

nlohmann::ordered_json SceneGraphToJson(const SceneGraph& graph);
std::string SerializeSceneGraph(const SceneGraph& graph);

// Non-fatal oddities, currently self-relations.
std::vector<std::string> ValidationWarnings(const SceneGraph& graph);

// D_R: relation triplets attributed to the object. Throws kUnknownObject.
std::size_t ObjectRelationCount(
    const SceneGraph& graph, std::string_view object_id,
    RelationCounting counting = RelationCounting::kSubjectOnly);

// D_A: attribute pairs on the object. Throws kUnknownObject.
std::size_t ObjectAttributeCount(const SceneGraph& graph,
                                 std::string_view object_id);

struct ObjectDegree {
  std::size_t relations = 0;
  std::size_t attributes = 0;
};

// Degrees for all objects at once, aligned with graph.objects().
std::vector<ObjectDegree> ObjectDegrees(
    const SceneGraph& graph,
    RelationCounting counting = RelationCounting::kSubjectOnly);

// Keeps the listed objects, their attributes, and relations whose endpoints
// are both kept. Throws kUnknownObject for ids not in the graph.
SceneGraph InducedSubgraph(const SceneGraph& graph,
                           const std::set<std::string>& keep_objects);

}  // namespace capdetail

#endif  // CAPDETAIL_SCENE_GRAPH_H_
