# Response models
