import numpy as np
import pandas as pd
import matplotlib.pyplot as plt
import seaborn as sns
import warnings
warnings.filterwarnings('ignore')
from sklearn.model_selection import train_test_split
from sklearn.feature_extraction.text import TfidfVectorizer
from sklearn.linear_model import LogisticRegression
from sklearn.svm import LinearSVC
from sklearn.metrics import classification_report

df = pd.read_csv('spam_sms.csv')

corr = df.corr(numeric_only=True)
print(corr['length'].sort_values())

plt.figure(figsize=(8, 4))
sns.boxplot(x='target', y='length', data=df)
plt.xticks(rotation=45)
plt.show()

df.tail()
df.columns
print(len(df))

dup = df.duplicated().sum()
print('duplicates:', dup)
df = df.drop_duplicates()

missing = df.isnull().mean() * 100
missing = missing.sort_values(ascending=False)
print(missing.head(10))

cat_cols = df.select_dtypes(include='object').columns
for c in cat_cols:
    print(df[c].value_counts().head())

sns.pairplot(df.sample(100))
plt.show()

df.hist(bins=30, figsize=(12, 8))
plt.tight_layout()
plt.show()

def summarize(frame):
    return frame.describe().T

summary = summarize(df)
print(summary)

fig, ax = plt.subplots(1, 2, figsize=(14, 5))
df['length'].plot(kind='hist', ax=ax[0])
df.boxplot(column='length', ax=ax[1])
plt.show()

print(df['length'].describe())
print(df['length'].skew())
sns.histplot(df['length'], kde=True)
plt.show()

df['length'] = df['length'].fillna(df['length'].median())
df['target'] = df['target'].map({'yes': 1, 'no': 0})

X = df['message']
y = df['target']
X_train, X_test, y_train, y_test = train_test_split(X, y, test_size=0.3, random_state=49)
print(X_train.shape, X_test.shape)

prep0 = TfidfVectorizer()
X_train = prep0.fit_transform(X_train)
X_test = prep0.transform(X_test)

model = LinearSVC()
model.fit(X_train, y_train)
preds = model.predict(X_test)
print(classification_report(y_test, preds))

model1 = LogisticRegression()
model1.fit(X_train, y_train)
preds = model1.predict(X_test)
print(classification_report(y_test, preds))

submission = pd.DataFrame({'id': range(len(preds)), 'prediction': preds})
submission.to_csv('submission.csv', index=False)
print(submission.head())
