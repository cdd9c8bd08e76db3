# Request models
