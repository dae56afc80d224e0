use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The four review portals of the scrape. Every record belongs to exactly one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Airport,
    Lounge,
    Airline,
    Seat,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Airport,
        Category::Lounge,
        Category::Airline,
        Category::Seat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Airport => "airport",
            Category::Lounge => "lounge",
            Category::Airline => "airline",
            Category::Seat => "seat",
        }
    }

    pub fn schema(self) -> RatingSchema {
        RatingSchema::for_category(self)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown review category `{0}` (expected airport, lounge, airline or seat)")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "airport" | "airports" => Ok(Category::Airport),
            "lounge" | "lounges" => Ok(Category::Lounge),
            "airline" | "airlines" => Ok(Category::Airline),
            "seat" | "seats" => Ok(Category::Seat),
            _ => Err(UnknownCategory(s.to_string())),
        }
    }
}

/// Inclusive integer value domain of a rating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub min: u8,
    pub max: u8,
}

impl Domain {
    pub const STARS: Domain = Domain { min: 1, max: 5 };
    pub const OVERALL: Domain = Domain { min: 1, max: 10 };

    pub fn contains(self, v: u8) -> bool {
        (self.min..=self.max).contains(&v)
    }

    pub fn len(self) -> usize {
        usize::from(self.max - self.min) + 1
    }

    pub fn is_empty(self) -> bool {
        self.max < self.min
    }
}

const AIRPORT_FEATURES: [&str; 8] = [
    "queuing",
    "airport_shopping",
    "terminal_cleanliness",
    "terminal_seating",
    "food_beverages",
    "wifi_connectivity",
    "terminal_signs",
    "airport_staff",
];

const LOUNGE_FEATURES: [&str; 7] = [
    "comfort",
    "staff_service",
    "bar_beverages",
    "catering",
    "cleanliness",
    "washrooms",
    "wifi",
];

const AIRLINE_FEATURES: [&str; 7] = [
    "value_money",
    "cabin_staff",
    "seat_comfort",
    "food_beverages",
    "inflight_entertainment",
    "ground_service",
    "wifi_connectivity",
];

const SEAT_FEATURES: [&str; 7] = [
    "seat_legroom",
    "seat_width",
    "aisle_space",
    "seat_recline",
    "viewing_tv",
    "seat_storage",
    "power_supply",
];

/// Ordered rating features of one category. All features share the 1..5 star
/// domain; the overall rating uses 1..10.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatingSchema {
    pub category: Category,
    features: &'static [&'static str],
}

impl RatingSchema {
    pub fn for_category(category: Category) -> Self {
        let features: &'static [&'static str] = match category {
            Category::Airport => &AIRPORT_FEATURES,
            Category::Lounge => &LOUNGE_FEATURES,
            Category::Airline => &AIRLINE_FEATURES,
            Category::Seat => &SEAT_FEATURES,
        };
        RatingSchema { category, features }
    }

    pub fn features(&self) -> &'static [&'static str] {
        self.features
    }

    pub fn feature_domain(&self) -> Domain {
        Domain::STARS
    }

    pub fn overall_domain(&self) -> Domain {
        Domain::OVERALL
    }

    pub fn index_of(&self, feature: &str) -> Option<usize> {
        self.features.iter().position(|f| *f == feature)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Maps a raw CSV header to a schema feature, accepting the scrape's
    /// `<feature>_rating` naming and the few cosmetic renames it uses.
    pub fn resolve_alias(&self, header: &str) -> Option<usize> {
        let h = normalize_header(header);
        let base = h.strip_suffix("_rating").unwrap_or(&h);
        if let Some(i) = self.index_of(base) {
            return Some(i);
        }
        let renamed = match (self.category, base) {
            (Category::Lounge, "wifi_connectivity") => "wifi",
            (Category::Lounge, "staff") => "staff_service",
            (Category::Airport, "queuing_times" | "queueing") => "queuing",
            (Category::Airline, "value_for_money") => "value_money",
            (Category::Seat, "legroom") => "seat_legroom",
            (Category::Seat, "width") => "seat_width",
            (Category::Seat, "recline") => "seat_recline",
            _ => return None,
        };
        self.index_of(renamed)
    }
}

pub(crate) fn normalize_header(h: &str) -> String {
    h.trim()
        .trim_start_matches('\u{feff}')
        .to_ascii_lowercase()
        .replace([' ', '-'], "_")
}
