"""Canonical demo dialogues: six complex questions with gold logical forms,
entity bindings, expected templated sub-questions, and a small knowledge-base
fixture that answers the first dialogue.

These cases double as regression fixtures: the expected renderings are frozen
strings the templater must reproduce byte-for-byte.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .lf import EntityMap


@dataclass(frozen=True)
class DemoCase:
    name: str
    question: str
    lf: str
    entities: list  # (surface, kb_id) in placeholder order
    expected_questions: list
    answers: list = field(default_factory=list)

    def entity_map(self) -> EntityMap:
        m = EntityMap()
        for surface, kb_id in self.entities:
            m.add(surface, kb_id)
        return m


DEMO_CASES = [
    DemoCase(
        name="official_language",
        question="What is the official language of the country that contains Al Sharqia Governorate?",
        lf=(
            "<sparql-header-1> ?c ns:location.country.administrative_divisions #entity1# . "
            "?c ns:location.country.official_language ?x ."
        ),
        entities=[("Al Sharqia Governorate", "m.0kfrqv")],
        expected_questions=[
            "What is/are the country/countries that contain(s) Al Sharqia Governorate?",
            "That entity is/are the country/countries whose official language is what?",
        ],
        answers=["Modern Standard Arabic"],
    ),
    DemoCase(
        name="mascot",
        question="What is the mascot of the team that has Nicholas S. Zeppos as its leader?",
        lf=(
            "<sparql-header-1> ?c ns:organization.organization.leadership ?k . "
            "?k ns:organization.leadership.person #entity1# . "
            "?c ns:education.educational_institution.mascot ?x ."
        ),
        entities=[("Nicholas S. Zeppos", "m.05nryb3")],
        expected_questions=[
            "What is/are the organization whose leadership includes a person named Nicholas S. Zeppos?",
            "That entity is/are the educational institution with the mascot what?",
        ],
        answers=["Mr. Commodore"],
    ),
    DemoCase(
        name="capital_residence",
        question="What country with the capital of Hagåtña is where Sam Shepard lives?",
        lf=(
            "<sparql-header-2> #entity1# ns:people.person.places_lived ?y . "
            "?y ns:people.place_lived.location ?x . "
            "?x ns:location.country.capital #entity2# ."
        ),
        entities=[("Sam Shepard", "m.0jbrv"), ("Hagåtña", "m.0ftkx")],
        expected_questions=[
            "Sam Shepard is/are the person(s) who lived in what?",
            "Of which, what is/are the location with the capital city named Hagåtña?",
        ],
        answers=["Guam"],
    ),
    DemoCase(
        name="calling_code",
        question="What country is in the Caribbean with a country calling code higher than 590?",
        lf=(
            "<sparql-header-2> #entity1# ns:location.location.contains ?x . "
            "?x ns:common.topic.notable_types #entity2# . "
            "?x ns:location.country.calling_code ?num . "
            "filter ( xsd:integer ( ?num ) > 590 ) ."
        ),
        entities=[("Caribbean", "m.0261m"), ("country", "m.01mp")],
        expected_questions=[
            "Caribbean is/are the location(s) containing what (country)?",
            "Of which, what is/are the country/countries whose calling code is/are greater than 590?",
        ],
        answers=["Jamaica"],
    ),
    DemoCase(
        name="draft_pick",
        question="Which pro athlete started his career earliest and was drafted by the Cleveland Browns?",
        lf=(
            "<sparql-header-2> #entity1# ns:sports.professional_sports_team.draft_picks ?y . "
            "?y ns:sports.sports_league_draft_pick.player ?x . "
            "?x ns:sports.pro_athlete.career_start ?num . "
            "} order by ?num limit 1"
        ),
        entities=[("Cleveland Browns", "m.02d9nr")],
        expected_questions=[
            "Cleveland Browns is/are the team(s) that drafted the athlete(s) what?",
            "These entities are the pro athlete(s) who started their career(s) in what?",
            "Of these, which is the entity associated with the earliest date?",
        ],
        answers=["Len Ford"],
    ),
    DemoCase(
        name="order_member",
        question="Who is both a member of the Kennedy family and the Order of the British Empire?",
        lf=(
            "<sparql-header-2> filter ( ?x != #entity1# ) "
            "{ # parents #entity2# ns:people.person.parents ?x . } union "
            "{ # children #entity3# ns:people.person.children ?x . } union "
            "{ # siblings #entity4# ns:people.person.sibling_s ?y . ?y ns:people.sibling_relationship.sibling ?x . } union "
            "{ # spouse #entity5# ns:people.person.spouse_s ?y . ?y ns:people.marriage.spouse ?x . "
            "?y ns:people.marriage.type_of_union #entity6# . filter ( not exists { ?y ns:people.marriage.to [] } ) } "
            "?x ns:royalty.chivalric_order_member.belongs_to_order ?c . "
            "?c ns:royalty.chivalric_order_membership.order #entity7# ."
        ),
        entities=[
            ("John F. Kennedy", "m.0d3k14"),
            ("John F. Kennedy", "m.0d3k14"),
            ("John F. Kennedy", "m.0d3k14"),
            ("John F. Kennedy", "m.0d3k14"),
            ("John F. Kennedy", "m.0d3k14"),
            ("Marriage", "m.04ztj"),
            ("Order of the British Empire", "m.0g9w2"),
        ],
        expected_questions=[
            "Who is/was the family of John F. Kennedy?",
            "Of which, what is/are the member(s) of the order of Order of the British Empire?",
        ],
        answers=["Kathleen Cavendish, Marchioness of Hartington"],
    ),
]


def case(name: str) -> DemoCase:
    for c in DEMO_CASES:
        if c.name == name:
            return c
    raise KeyError(name)


# Fixture knowledge base: enough triples to execute the first demo dialogue
# and the capital -> official-language correction flow end to end.
DEMO_STORE_ROWS = [
    ("Egypt", "location.country.administrative_divisions", "Al Sharqia Governorate"),
    ("Egypt", "location.country.official_language", "Modern Standard Arabic"),
    ("Egypt", "location.country.capital", "Cairo"),
]
