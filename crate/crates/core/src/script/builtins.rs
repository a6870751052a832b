/// Functions callable from scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sqrt,
    Abs,
    Reverse,
    Dual,
    Inverse,
    Norm,
    Normalize,
    CreatePoint,
    CreateSphere,
    CreatePlane,
    CreateLine,
    CreateCircle,
    Translator,
    Rotor,
    Project,
    Reflect,
    Sandwich,
    SplitPointPair,
}

impl Builtin {
    pub const ALL: [Builtin; 18] = [
        Builtin::Sqrt,
        Builtin::Abs,
        Builtin::Reverse,
        Builtin::Dual,
        Builtin::Inverse,
        Builtin::Norm,
        Builtin::Normalize,
        Builtin::CreatePoint,
        Builtin::CreateSphere,
        Builtin::CreatePlane,
        Builtin::CreateLine,
        Builtin::CreateCircle,
        Builtin::Translator,
        Builtin::Rotor,
        Builtin::Project,
        Builtin::Reflect,
        Builtin::Sandwich,
        Builtin::SplitPointPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sqrt => "sqrt",
            Builtin::Abs => "abs",
            Builtin::Reverse => "reverse",
            Builtin::Dual => "dual",
            Builtin::Inverse => "inverse",
            Builtin::Norm => "norm",
            Builtin::Normalize => "normalize",
            Builtin::CreatePoint => "createPoint",
            Builtin::CreateSphere => "createSphere",
            Builtin::CreatePlane => "createPlane",
            Builtin::CreateLine => "createLine",
            Builtin::CreateCircle => "createCircle",
            Builtin::Translator => "translator",
            Builtin::Rotor => "rotor",
            Builtin::Project => "project",
            Builtin::Reflect => "reflect",
            Builtin::Sandwich => "sandwich",
            Builtin::SplitPointPair => "splitPointPair",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Self::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Sqrt
            | Builtin::Abs
            | Builtin::Reverse
            | Builtin::Dual
            | Builtin::Inverse
            | Builtin::Norm
            | Builtin::Normalize => 1,
            Builtin::CreateSphere
            | Builtin::CreateLine
            | Builtin::Rotor
            | Builtin::Project
            | Builtin::Reflect
            | Builtin::Sandwich
            | Builtin::SplitPointPair => 2,
            Builtin::CreatePoint | Builtin::CreateCircle | Builtin::Translator => 3,
            Builtin::CreatePlane => 4,
        }
    }

    /// Whether the function only makes sense in the conformal algebra.
    pub fn needs_conformal(self) -> bool {
        matches!(
            self,
            Builtin::CreatePoint
                | Builtin::CreateSphere
                | Builtin::CreatePlane
                | Builtin::CreateLine
                | Builtin::CreateCircle
                | Builtin::Translator
                | Builtin::SplitPointPair
        )
    }
}
