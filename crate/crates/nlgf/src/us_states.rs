//! US state code table: the 50 states plus DC.

pub const STATES: [(&str, &str); 51] = [
    ("AL", "Alabama"),
    ("AK", "Alaska"),
    ("AZ", "Arizona"),
    ("AR", "Arkansas"),
    ("CA", "California"),
    ("CO", "Colorado"),
    ("CT", "Connecticut"),
    ("DE", "Delaware"),
    ("DC", "District of Columbia"),
    ("FL", "Florida"),
    ("GA", "Georgia"),
    ("HI", "Hawaii"),
    ("ID", "Idaho"),
    ("IL", "Illinois"),
    ("IN", "Indiana"),
    ("IA", "Iowa"),
    ("KS", "Kansas"),
    ("KY", "Kentucky"),
    ("LA", "Louisiana"),
    ("ME", "Maine"),
    ("MD", "Maryland"),
    ("MA", "Massachusetts"),
    ("MI", "Michigan"),
    ("MN", "Minnesota"),
    ("MS", "Mississippi"),
    ("MO", "Missouri"),
    ("MT", "Montana"),
    ("NE", "Nebraska"),
    ("NV", "Nevada"),
    ("NH", "New Hampshire"),
    ("NJ", "New Jersey"),
    ("NM", "New Mexico"),
    ("NY", "New York"),
    ("NC", "North Carolina"),
    ("ND", "North Dakota"),
    ("OH", "Ohio"),
    ("OK", "Oklahoma"),
    ("OR", "Oregon"),
    ("PA", "Pennsylvania"),
    ("RI", "Rhode Island"),
    ("SC", "South Carolina"),
    ("SD", "South Dakota"),
    ("TN", "Tennessee"),
    ("TX", "Texas"),
    ("UT", "Utah"),
    ("VT", "Vermont"),
    ("VA", "Virginia"),
    ("WA", "Washington"),
    ("WV", "West Virginia"),
    ("WI", "Wisconsin"),
    ("WY", "Wyoming"),
];

/// Normalizes a state given as a two-letter code or a full name to its
/// canonical two-letter code. Territories and unknown strings return `None`.
pub fn normalize_state(s: &str) -> Option<&'static str> {
    let t = s.trim();
    if t.len() == 2 {
        let upper = t.to_ascii_uppercase();
        return STATES.iter().find(|(c, _)| *c == upper).map(|(c, _)| *c);
    }
    let lower = t.to_ascii_lowercase();
    STATES
        .iter()
        .find(|(_, n)| n.to_ascii_lowercase() == lower)
        .map(|(c, _)| *c)
}

/// Full display name for a two-letter code.
pub fn state_display_name(code: &str) -> Option<&'static str> {
    let upper = code.trim().to_ascii_uppercase();
    STATES.iter().find(|(c, _)| *c == upper).map(|(_, n)| *n)
}
