"""Closed tag vocabularies and the default caregiver catalog.

The health-condition list, tag sets, starter activity pool and plan templates
ship as data so a deployment can swap them without code changes
(``load_activity_pool`` reads the documented JSON shape).
"""

from __future__ import annotations

HEALTH_CONDITIONS = frozenset({
    "none",
    "hypertension",
    "prediabetes",
    "diabetes",
    "obesity",
    "asthma",
    "arthritis",
    "heart-disease",
})

ACTIVITY_TAGS = frozenset({
    "walking", "hiking", "jogging", "cycling", "swimming", "yoga",
    "stretching", "strength", "meditation", "breathing", "dancing",
    "gardening", "team-sport", "stairs", "posture",
})

FOOD_TAGS = frozenset({
    "vegetables", "fruits", "whole-grains", "legumes", "fish", "nuts",
    "low-sugar", "low-salt", "hydration", "salad", "lean-protein",
    "fermented", "home-cooked", "portion-control", "breakfast",
})

RESOURCE_TAGS = frozenset({
    "bicycle", "gym-access", "pool-access", "yoga-mat", "running-shoes",
    "kitchen", "blender", "park-nearby", "stairs-at-home", "scale",
})


# Starter activity pool: id, kind, title, tags, required resources, importance.
# Most entries need no resources so a fresh user always has feasible options
# of every kind; the gated ones exercise the skill/feasibility filter.
DEFAULT_POOL = [
    # Diet
    ("a-veg-lunch",    "Diet", "Add a vegetable portion to lunch", {"vegetables", "salad"}, set(), 4),
    ("a-fruit-snack",  "Diet", "Swap one snack for fruit", {"fruits", "low-sugar"}, set(), 3),
    ("a-whole-grain",  "Diet", "Choose whole-grain bread or rice", {"whole-grains"}, set(), 3),
    ("a-fish-dinner",  "Diet", "Cook a fish dinner", {"fish", "lean-protein", "home-cooked"}, {"kitchen"}, 4),
    ("a-legume-meal",  "Diet", "Prepare a legume-based meal", {"legumes", "home-cooked"}, {"kitchen"}, 3),
    ("a-water-2l",     "Diet", "Drink two litres of water", {"hydration"}, set(), 5),
    ("a-smoothie",     "Diet", "Blend a green smoothie", {"vegetables", "fruits"}, {"blender"}, 2),
    ("a-low-salt",     "Diet", "Keep today's meals low in salt", {"low-salt", "portion-control"}, set(), 4),
    ("a-nuts-handful", "Diet", "Replace crisps with a handful of nuts", {"nuts", "low-sugar"}, set(), 2),
    ("a-big-breakfast","Diet", "Eat a balanced breakfast", {"breakfast", "whole-grains"}, set(), 3),
    ("a-ferment",      "Diet", "Add a fermented food to one meal", {"fermented"}, set(), 2),
    ("a-salad-dinner", "Diet", "Make a salad your dinner side", {"salad", "vegetables"}, set(), 3),
    # Physical
    ("a-walk-30",      "Physical", "Walk for 30 minutes", {"walking"}, set(), 5),
    ("a-walk-60",      "Physical", "Take a one-hour walk", {"walking", "hiking"}, set(), 4),
    ("a-stairs",       "Physical", "Take the stairs all day", {"stairs"}, set(), 3),
    ("a-jog-20",       "Physical", "Jog for 20 minutes", {"jogging"}, {"running-shoes"}, 4),
    ("a-bike-ride",    "Physical", "Ride a bicycle for 30 minutes", {"cycling"}, {"bicycle"}, 4),
    ("a-swim",         "Physical", "Swim a few laps", {"swimming"}, {"pool-access"}, 3),
    ("a-gym-strength", "Physical", "Do a strength session", {"strength"}, {"gym-access"}, 4),
    ("a-home-stretch", "Physical", "Stretch for 15 minutes", {"stretching"}, set(), 3),
    ("a-park-hike",    "Physical", "Hike in the nearest park", {"hiking", "walking"}, {"park-nearby"}, 3),
    ("a-dance",        "Physical", "Dance to three songs", {"dancing"}, set(), 2),
    ("a-garden",       "Physical", "Do 30 minutes of gardening", {"gardening"}, set(), 2),
    # Wellness
    ("a-meditate",     "Wellness", "Meditate for 10 minutes", {"meditation", "breathing"}, set(), 4),
    ("a-breathing",    "Wellness", "Do a breathing exercise", {"breathing"}, set(), 3),
    ("a-yoga-15",      "Wellness", "Do 15 minutes of yoga", {"yoga", "stretching"}, {"yoga-mat"}, 3),
    ("a-posture",      "Wellness", "Check posture every hour", {"posture"}, set(), 2),
    ("a-weigh-in",     "Wellness", "Record your morning weight", {"posture"}, {"scale"}, 2),
    ("a-screen-break", "Wellness", "Take screen breaks each hour", {"breathing", "posture"}, set(), 3),
    ("a-early-night",  "Wellness", "Go to bed before 23:00", {"meditation"}, set(), 4),
]


# template_id -> (kind mix per day, target cluster ids, notes)
DEFAULT_TEMPLATES = [
    ("baseline-v1",
     {"Diet": 1, "Physical": 1, "Wellness": 1}, set(),
     "General-purpose starter week: one diet, one physical, one wellness item per day."),
    ("balanced-care-v1",
     {"Diet": 1, "Physical": 1, "Wellness": 1}, set(),
     "Condition-aware mix leaning on low-salt and low-sugar diet items."),
    ("active-burn-v1",
     {"Diet": 1, "Physical": 1, "Wellness": 1}, set(),
     "Heavier physical emphasis for users targeting weight reduction."),
]


DEFAULT_CORPUS = {
    "register_prompt": "Welcome! Ask your caregiver to register you, then send /newplan to see today's activities.",
    "help": "Commands: /newplan shows today's plan, /mood records how you feel, /help shows this message.",
    "no_plan_yet": "You have no plan for today yet. Your caregiver will assign one soon.",
    "comply_ack": "Got it, thanks for reporting!",
    "comply_duplicate": "That activity was already recorded for this slot.",
    "mood_prompt": "How do you feel right now?",
    "mood_ack": "Thanks for sharing how you feel.",
    "unknown_chat": "This chat is not linked to a registered user yet. Send /start for instructions.",
    "fallback": "Sorry, I only understand a few commands. Try /help.",
    "slot_reminder": "Time for your activity:",
}
